#include "edgemarket/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace edgemarket {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxDim = 4;

// One placement domain (the edge nodes or the cells): K sites with R
// resources each; a job of provider s on site k uses demand[s][k][r].
struct Domain {
  std::size_t sites = 0;
  std::size_t resources = 0;
  std::vector<std::vector<double>> capacity;  // [k][r]
  std::vector<std::vector<std::vector<double>>> demand;  // [s][k][r]
};

Domain mec_domain(const MarketInstance& in) {
  Domain d;
  d.sites = in.nodes();
  d.resources = in.resource_types();
  d.capacity.assign(d.sites, std::vector<double>(d.resources));
  for (std::size_t m = 0; m < d.sites; ++m) {
    for (std::size_t r = 0; r < d.resources; ++r) d.capacity[m][r] = in.mec_capacity(m, r);
  }
  d.demand.assign(in.providers(), d.capacity);
  for (std::size_t s = 0; s < in.providers(); ++s) {
    for (std::size_t m = 0; m < d.sites; ++m) {
      for (std::size_t r = 0; r < d.resources; ++r) d.demand[s][m][r] = in.mec_demand(s, r);
    }
  }
  return d;
}

Domain ran_domain(const MarketInstance& in) {
  Domain d;
  d.sites = in.cells();
  d.resources = 1;
  d.capacity.assign(d.sites, std::vector<double>(1));
  for (std::size_t c = 0; c < d.sites; ++c) d.capacity[c][0] = in.ran_capacity[c];
  d.demand.assign(in.providers(), d.capacity);
  for (std::size_t s = 0; s < in.providers(); ++s) {
    for (std::size_t c = 0; c < d.sites; ++c) d.demand[s][c][0] = in.ran_demand(s, c);
  }
  return d;
}

struct Row {
  std::array<double, kMaxDim> a{};
  double b = 0.0;
};

// Solves the n x n system given by `rows[idx[i]]` as equalities.
bool solve_square(const std::vector<Row>& rows, const std::array<std::size_t, kMaxDim>& idx,
                  std::size_t n, std::array<double, kMaxDim>& v) {
  std::array<std::array<double, kMaxDim + 1>, kMaxDim> m{};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m[i][j] = rows[idx[i]].a[j];
    m[i][n] = rows[idx[i]].b;
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t i = col + 1; i < n; ++i) {
      if (std::abs(m[i][col]) > std::abs(m[piv][col])) piv = i;
    }
    if (std::abs(m[piv][col]) < 1e-12) return false;
    std::swap(m[piv], m[col]);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col) continue;
      const double f = m[i][col] / m[col][col];
      for (std::size_t j = col; j <= n; ++j) m[i][j] -= f * m[col][j];
    }
  }
  for (std::size_t i = 0; i < n; ++i) v[i] = m[i][n] / m[i][i];
  return true;
}

bool satisfies(const std::vector<Row>& rows, const std::array<double, kMaxDim>& v, std::size_t n) {
  for (const auto& row : rows) {
    double lhs = 0.0, scale = 1.0 + std::abs(row.b);
    for (std::size_t j = 0; j < n; ++j) {
      lhs += row.a[j] * v[j];
      scale += std::abs(row.a[j] * v[j]);
    }
    if (lhs > row.b + 1e-9 * scale) return false;
  }
  return true;
}

// max v[n-1] over {v : rows}, by enumerating every vertex of the bounded
// polytope. Returns -inf when the polytope is empty.
double maximise_last(const std::vector<Row>& rows, std::size_t n) {
  double best = -kInf;
  std::array<std::size_t, kMaxDim> idx{};
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  const std::size_t total = rows.size();
  if (total < n) return best;
  std::array<double, kMaxDim> v{};
  while (true) {
    if (solve_square(rows, idx, n, v) && v[n - 1] > best && satisfies(rows, v, n)) {
      best = v[n - 1];
    }
    // next combination
    std::size_t i = n;
    while (i > 0 && idx[i - 1] == total - n + (i - 1)) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < n; ++j) idx[j] = idx[j - 1] + 1;
  }
  return best;
}

// Largest utility for provider p within one domain, others fixed at u.
double domain_max(const Domain& d, const UtilityVector& u, std::size_t p) {
  const std::size_t S = u.size();
  if (d.sites == 1) {
    double best = kInf;
    for (std::size_t r = 0; r < d.resources; ++r) {
      double left = d.capacity[0][r];
      for (std::size_t s = 0; s < S; ++s) {
        if (s != p) left -= u[s] * d.demand[s][0][r];
      }
      if (left < -1e-9 * (1.0 + d.capacity[0][r])) return -1.0;
      best = std::min(best, std::max(left, 0.0) / d.demand[p][0][r]);
    }
    return best;
  }
  // Two sites: variables t_0..t_{S-1} (jobs on site 0) and U = u_p.
  const std::size_t n = S + 1;
  std::vector<Row> rows;
  for (std::size_t s = 0; s < S; ++s) {
    Row lo;
    lo.a[s] = -1.0;
    rows.push_back(lo);
    Row hi;
    hi.a[s] = 1.0;
    if (s == p) {
      hi.a[S] = -1.0;
    } else {
      hi.b = u[s];
    }
    rows.push_back(hi);
  }
  Row nonneg;
  nonneg.a[S] = -1.0;
  rows.push_back(nonneg);
  for (std::size_t r = 0; r < d.resources; ++r) {
    Row first;
    first.b = d.capacity[0][r];
    Row second;
    second.b = d.capacity[1][r];
    for (std::size_t s = 0; s < S; ++s) {
      first.a[s] = d.demand[s][0][r];
      second.a[s] = -d.demand[s][1][r];
      if (s == p) {
        second.a[S] = d.demand[s][1][r];
      } else {
        second.b -= u[s] * d.demand[s][1][r];
      }
    }
    rows.push_back(first);
    rows.push_back(second);
  }
  const double best = maximise_last(rows, n);
  return best == -kInf ? -1.0 : std::max(best, 0.0);
}

void check_limits(const MarketInstance& instance, const OracleLimits& limits) {
  instance.check_dimensions();
  if (instance.providers() > limits.providers || instance.nodes() > limits.nodes ||
      instance.cells() > limits.cells || instance.resource_types() > limits.resource_types ||
      instance.providers() + 1 > kMaxDim || instance.nodes() > 2 || instance.cells() > 2) {
    throw OracleSizeError("instance exceeds the exhaustive-search limits (S<=" +
                          std::to_string(limits.providers) + ", M<=" +
                          std::to_string(limits.nodes) + ", C<=" + std::to_string(limits.cells) +
                          ", R<=" + std::to_string(limits.resource_types) + ")");
  }
  if (instance.providers() == 0 || instance.nodes() == 0 || instance.cells() == 0) {
    throw OracleSizeError("instance has no providers, nodes or cells");
  }
}

struct Search {
  const MarketInstance& instance;
  Domain mec, ran;
  std::vector<double> step;
  std::size_t levels = 0;  // grid values per provider
  std::size_t last = 0;
  UtilityVector u;
  UtilityVector best;
  double best_log = -kInf;
  bool found = false;
  std::size_t points = 0;

  double capacity_left(std::size_t provider) const {
    return std::min(domain_max(mec, u, provider), domain_max(ran, u, provider));
  }

  void visit(std::size_t s) {
    if (s == last) {
      ++points;
      const double top = capacity_left(last);
      if (top < 0.0) return;
      u[last] = top;
      const double value = log_nash_social_welfare(u, instance.budgets);
      if (!found || value > best_log) {
        best_log = value;
        best = u;
        found = true;
      }
      u[last] = 0.0;
      return;
    }
    for (std::size_t i = 0; i < levels; ++i) {
      u[s] = static_cast<double>(i) * step[s];
      // Targets only grow along the loop, so the first infeasible one ends it.
      if (capacity_left(last) < 0.0) break;
      visit(s + 1);
    }
    u[s] = 0.0;
  }
};

}  // namespace

double max_utility_given_others(const MarketInstance& instance, const UtilityVector& u,
                                std::size_t provider, const OracleLimits& limits) {
  check_limits(instance, limits);
  if (u.size() != instance.providers() || provider >= u.size()) {
    throw InstanceError("utility vector or provider index does not match the instance");
  }
  const double mec = domain_max(mec_domain(instance), u, provider);
  const double ran = domain_max(ran_domain(instance), u, provider);
  if (mec < 0.0 || ran < 0.0) return -1.0;
  return std::min(mec, ran);
}

OracleResult brute_force_nsw_oracle(const MarketInstance& instance, double grid_resolution,
                                    const OracleLimits& limits) {
  check_limits(instance, limits);
  if (!(grid_resolution > 0.0) || grid_resolution > 1.0) {
    throw std::invalid_argument("grid_resolution must lie in (0, 1]");
  }
  const std::size_t S = instance.providers();
  const auto levels = static_cast<std::size_t>(std::floor(1.0 / grid_resolution + 1e-9)) + 1;
  double points = 1.0;
  for (std::size_t s = 0; s + 1 < S; ++s) points *= static_cast<double>(levels);
  if (points > static_cast<double>(limits.grid_points)) {
    throw OracleSizeError("grid of " + std::to_string(points) + " points exceeds the limit of " +
                          std::to_string(limits.grid_points));
  }

  Search search{instance, mec_domain(instance), ran_domain(instance), {}, levels, S - 1,
                UtilityVector(S, 0.0), UtilityVector(S, 0.0)};
  OracleResult result;
  search.step.resize(S);
  double largest = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    largest = std::max(largest, standalone_utility(instance, s));
    search.step[s] = grid_resolution * standalone_utility(instance, s);
    if (s + 1 < S) result.error_bound = std::max(result.error_bound, search.step[s]);
  }
  // Vertex enumeration is exact only up to rounding, which matters when
  // nothing is gridded (a single provider).
  result.error_bound = std::max(result.error_bound, 1e-9 * largest);
  search.visit(0);

  // The last provider is not gridded: its error follows the slope of the
  // feasible frontier around the best point, summed over one grid step
  // in each gridded coordinate.
  if (search.found && S > 1) {
    double last_error = 0.0;
    for (std::size_t s = 0; s + 1 < S; ++s) {
      double swing = 0.0;
      for (const double dir : {-1.0, 1.0}) {
        search.u = search.best;
        search.u[s] += dir * search.step[s];
        if (search.u[s] < 0.0) continue;
        search.u[S - 1] = 0.0;
        const double top = search.capacity_left(S - 1);
        if (top >= 0.0) swing = std::max(swing, std::abs(top - search.best[S - 1]));
      }
      last_error += swing;
    }
    result.error_bound = std::max(result.error_bound, last_error);
  }
  result.utilities = search.best;
  result.log_nsw = search.best_log;
  result.grid_points = search.points;
  return result;
}

Certificate check_pareto(const MarketInstance& instance, const UtilityVector& u,
                         double oracle_resolution, const OracleLimits& limits) {
  check_limits(instance, limits);
  if (u.size() != instance.providers()) throw InstanceError("utility vector has the wrong length");
  double scale = 0.0;
  for (std::size_t s = 0; s < instance.providers(); ++s) {
    scale = std::max(scale, standalone_utility(instance, s));
  }
  double gain = 0.0;
  double shortfall = 0.0;  // how far u itself is outside the feasible set
  for (std::size_t k = 0; k < instance.providers(); ++k) {
    const double top = max_utility_given_others(instance, u, k, limits);
    if (top < 0.0) {
      shortfall = std::max(shortfall, scale);
      continue;
    }
    gain = std::max(gain, top - u[k]);
    shortfall = std::max(shortfall, u[k] - top);
  }
  Certificate cert;
  cert.name = "pareto_efficiency";
  const double tol = oracle_resolution * scale;
  cert.checks.push_back({"dominating_gain", gain, tol, gain <= tol});
  const double feas_tol = 1e-6 * (1.0 + scale);
  cert.checks.push_back({"utility_feasible", shortfall, feas_tol, shortfall <= feas_tol});
  return cert;
}

}  // namespace edgemarket
