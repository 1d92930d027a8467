#include "edgemarket/eg_solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "interior_point.hpp"

namespace edgemarket {

namespace {

// Column layout of the program: x, y, j, u.
struct Layout {
  std::size_t S, M, R, C;

  std::size_t x(std::size_t s, std::size_t m, std::size_t r) const { return (s * M + m) * R + r; }
  std::size_t y(std::size_t s, std::size_t c) const { return S * M * R + s * C + c; }
  std::size_t j(std::size_t s, std::size_t m) const { return S * M * R + S * C + s * M + m; }
  std::size_t u(std::size_t s) const { return S * M * R + S * C + S * M + s; }
  std::size_t variables() const { return S * M * R + S * C + S * M + S; }

  // Row layout: job split, MEC bottleneck, RAN bottleneck, MEC capacity,
  // RAN capacity, then one sign row per variable.
  std::size_t split_row(std::size_t s, std::size_t m, std::size_t r) const { return x(s, m, r); }
  std::size_t mec_row(std::size_t s) const { return S * M * R + s; }
  std::size_t ran_row(std::size_t s) const { return S * M * R + S + s; }
  std::size_t mec_cap_row(std::size_t m, std::size_t r) const { return S * M * R + 2 * S + m * R + r; }
  std::size_t ran_cap_row(std::size_t c) const { return S * M * R + 2 * S + M * R + c; }
  std::size_t sign_row(std::size_t var) const { return S * M * R + 2 * S + M * R + C + var; }
  std::size_t constraints() const { return S * M * R + 2 * S + M * R + C + variables(); }
};

Layout layout_of(const MarketInstance& instance) {
  return {instance.providers(), instance.nodes(), instance.resource_types(), instance.cells()};
}

void require_valid(const MarketInstance& instance, const SolverSettings& settings) {
  settings.validate();
  instance.check_dimensions();
  if (auto report = validate_instance(instance); !report.ok()) {
    throw InstanceError("invalid instance:\n" + report.summary());
  }
}

detail::ConvexProgram build_program(const MarketInstance& instance, const Layout& L) {
  detail::ConvexProgram p;
  p.variables = L.variables();
  p.constraints = L.constraints();
  p.h.assign(p.constraints, 0.0);
  auto& g = p.g;
  g.reserve(4 * L.S * L.M * L.R + 3 * L.S * (L.M + L.C) + p.variables);

  for (std::size_t s = 0; s < L.S; ++s) {
    for (std::size_t m = 0; m < L.M; ++m) {
      for (std::size_t r = 0; r < L.R; ++r) {
        const auto row = L.split_row(s, m, r);
        g.push_back({row, L.j(s, m), 1.0});
        g.push_back({row, L.x(s, m, r), -1.0 / instance.mec_demand(s, r)});
      }
    }
    g.push_back({L.mec_row(s), L.u(s), 1.0});
    for (std::size_t m = 0; m < L.M; ++m) g.push_back({L.mec_row(s), L.j(s, m), -1.0});
    g.push_back({L.ran_row(s), L.u(s), 1.0});
    for (std::size_t c = 0; c < L.C; ++c) {
      g.push_back({L.ran_row(s), L.y(s, c), -1.0 / instance.ran_demand(s, c)});
    }
  }
  for (std::size_t m = 0; m < L.M; ++m) {
    for (std::size_t r = 0; r < L.R; ++r) {
      const auto row = L.mec_cap_row(m, r);
      for (std::size_t s = 0; s < L.S; ++s) g.push_back({row, L.x(s, m, r), 1.0});
      p.h[row] = instance.mec_capacity(m, r);
    }
  }
  for (std::size_t c = 0; c < L.C; ++c) {
    const auto row = L.ran_cap_row(c);
    for (std::size_t s = 0; s < L.S; ++s) g.push_back({row, L.y(s, c), 1.0});
    p.h[row] = instance.ran_capacity[c];
  }
  for (std::size_t v = 0; v < p.variables; ++v) g.push_back({L.sign_row(v), v, -1.0});
  return p;
}

// Shares of each good, rows = goods (M*R + C), cols = providers.
Matrix initial_shares(const MarketInstance& instance, const SolverSettings& settings) {
  const auto S = instance.providers();
  const auto goods = instance.nodes() * instance.resource_types() + instance.cells();
  Matrix shares(goods, S);
  if (settings.initial_point == InitialPoint::proportional) {
    const double total = instance.total_budget();
    for (std::size_t g = 0; g < goods; ++g) {
      for (std::size_t s = 0; s < S; ++s) shares(g, s) = instance.budgets[s] / total;
    }
    return shares;
  }
  std::mt19937_64 rng(settings.seed);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  for (std::size_t g = 0; g < goods; ++g) {
    double total = 0.0;
    for (std::size_t s = 0; s < S; ++s) total += shares(g, s) = unit(rng);
    for (std::size_t s = 0; s < S; ++s) shares(g, s) /= total;
  }
  return shares;
}

// Strictly interior point: half of a split of every good, jobs and
// utilities at half of what that split supports.
std::vector<double> interior_start(const MarketInstance& instance, const Layout& L,
                                   const SolverSettings& settings) {
  const Matrix shares = initial_shares(instance, settings);
  std::vector<double> z(L.variables(), 0.0);
  for (std::size_t s = 0; s < L.S; ++s) {
    double jobs = 0.0;
    for (std::size_t m = 0; m < L.M; ++m) {
      double bound = INFINITY;
      for (std::size_t r = 0; r < L.R; ++r) {
        const double x = 0.5 * shares(m * L.R + r, s) * instance.mec_capacity(m, r);
        z[L.x(s, m, r)] = x;
        bound = std::min(bound, x / instance.mec_demand(s, r));
      }
      z[L.j(s, m)] = 0.5 * bound;
      jobs += 0.5 * bound;
    }
    double uploads = 0.0;
    for (std::size_t c = 0; c < L.C; ++c) {
      const double y = 0.5 * shares(L.M * L.R + c, s) * instance.ran_capacity[c];
      z[L.y(s, c)] = y;
      uploads += y / instance.ran_demand(s, c);
    }
    z[L.u(s)] = 0.5 * std::min(jobs, uploads);
  }
  return z;
}

detail::IpmOptions ipm_options(const SolverSettings& settings) {
  detail::IpmOptions o;
  o.max_iterations = settings.max_iterations;
  o.step_fraction = settings.step_fraction;
  return o;
}

Allocation extract_allocation(const MarketInstance& instance, const Layout& L,
                              const std::vector<double>& z) {
  Allocation a(instance);
  for (std::size_t s = 0; s < L.S; ++s) {
    for (std::size_t m = 0; m < L.M; ++m) {
      for (std::size_t r = 0; r < L.R; ++r) a.mec(s, m, r) = std::max(0.0, z[L.x(s, m, r)]);
    }
    for (std::size_t c = 0; c < L.C; ++c) a.ran(s, c) = std::max(0.0, z[L.y(s, c)]);
  }
  return a;
}

double residual_of(const detail::IpmResult& r) {
  return std::max({r.dual_residual, r.primal_residual, r.max_complementarity});
}

SolverStatus status_of(const detail::IpmResult& r, const SolverSettings& settings) {
  if (r.z.empty()) return SolverStatus::infeasible_numerics;
  if (r.status == detail::IpmStatus::optimal || residual_of(r) < settings.kkt_tolerance) {
    return SolverStatus::converged;
  }
  if (r.status == detail::IpmStatus::max_iterations) return SolverStatus::max_iterations;
  return SolverStatus::infeasible_numerics;
}

}  // namespace

void SolverSettings::validate() const {
  if (!(kkt_tolerance > 0.0)) throw std::invalid_argument("kkt_tolerance must be positive");
  if (!(utility_floor > 0.0)) throw std::invalid_argument("utility_floor must be positive");
  if (max_iterations == 0) throw std::invalid_argument("max_iterations must be positive");
  if (!(step_fraction > 0.0 && step_fraction < 1.0)) {
    throw std::invalid_argument("step_fraction must lie in (0, 1)");
  }
  if (!(zero_snap >= 0.0)) throw std::invalid_argument("zero_snap must be non-negative");
}

EquilibriumSolution solve_eg(const MarketInstance& instance, const SolverSettings& settings) {
  require_valid(instance, settings);
  const Layout L = layout_of(instance);

  detail::ConvexProgram program = build_program(instance, L);
  for (std::size_t s = 0; s < L.S; ++s) program.logs.push_back({L.u(s), instance.budgets[s]});

  const double initial_mu = instance.total_budget() / static_cast<double>(program.constraints);
  const auto ipm = detail::solve_convex_program(program, interior_start(instance, L, settings),
                                                ipm_options(settings), initial_mu);

  EquilibriumSolution sol;
  sol.iterations = ipm.iterations;
  sol.solver_status = status_of(ipm, settings);
  if (ipm.z.empty()) return sol;

  sol.allocation = extract_allocation(instance, L, ipm.z);
  sol.utilities.resize(L.S);
  sol.job_split = Matrix(L.S, L.M);
  for (std::size_t s = 0; s < L.S; ++s) {
    sol.utilities[s] = ipm.z[L.u(s)];
    for (std::size_t m = 0; m < L.M; ++m) sol.job_split(s, m) = std::max(0.0, ipm.z[L.j(s, m)]);
  }
  sol.mec_prices = Matrix(L.M, L.R);
  for (std::size_t m = 0; m < L.M; ++m) {
    for (std::size_t r = 0; r < L.R; ++r) sol.mec_prices(m, r) = ipm.lambda[L.mec_cap_row(m, r)];
  }
  sol.ran_prices.resize(L.C);
  for (std::size_t c = 0; c < L.C; ++c) sol.ran_prices[c] = ipm.lambda[L.ran_cap_row(c)];

  double money = 0.0;
  for (std::size_t m = 0; m < L.M; ++m) {
    for (std::size_t r = 0; r < L.R; ++r) money += sol.mec_prices(m, r) * instance.mec_capacity(m, r);
  }
  for (std::size_t c = 0; c < L.C; ++c) money += sol.ran_prices[c] * instance.ran_capacity[c];

  double objective = 0.0;
  double dual = money;
  for (std::size_t s = 0; s < L.S; ++s) {
    const double B = instance.budgets[s];
    if (sol.utilities[s] < settings.utility_floor) {
      sol.solver_status = SolverStatus::infeasible_numerics;
    }
    objective += B * std::log(sol.utilities[s]);
    // Multiplier of u_s in G'lambda: bottleneck rows minus its sign row.
    const double a = ipm.lambda[L.mec_row(s)] + ipm.lambda[L.ran_row(s)] -
                     ipm.lambda[L.sign_row(L.u(s))];
    dual += B * (std::log(B / a) - 1.0);
  }
  sol.objective_value = objective;
  sol.duality_gap = std::abs(objective - dual);
  sol.solver_residual = residual_of(ipm);
  return sol;
}

MechanismResult solve_linear(const MarketInstance& instance, std::span<const double> weights,
                             const SolverSettings& settings) {
  require_valid(instance, settings);
  if (weights.size() != instance.providers()) {
    throw InstanceError("weights must have one entry per provider");
  }
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("weights must be >= 0");
  }
  const Layout L = layout_of(instance);
  detail::ConvexProgram program = build_program(instance, L);
  program.c.assign(program.variables, 0.0);
  double weight_sum = 0.0;
  for (std::size_t s = 0; s < L.S; ++s) {
    program.c[L.u(s)] = -weights[s];
    weight_sum += weights[s];
  }

  // The start has to carry multipliers large enough to offset the weights
  // in the dual residual; with less, early steps stay very short.
  const double initial_mu =
      10.0 * std::max(weight_sum, 1.0) / static_cast<double>(program.constraints);
  const auto ipm = detail::solve_convex_program(program, interior_start(instance, L, settings),
                                                ipm_options(settings), initial_mu);

  MechanismResult result;
  result.mechanism = Mechanism::so;
  result.iterations = ipm.iterations;
  result.status = status_of(ipm, settings);
  if (ipm.z.empty()) return result;

  Allocation a = extract_allocation(instance, L, ipm.z);
  for (std::size_t s = 0; s < L.S; ++s) {
    for (std::size_t m = 0; m < L.M; ++m) {
      for (std::size_t r = 0; r < L.R; ++r) {
        if (a.mec(s, m, r) < settings.zero_snap * instance.mec_capacity(m, r)) a.mec(s, m, r) = 0.0;
      }
    }
    for (std::size_t c = 0; c < L.C; ++c) {
      if (a.ran(s, c) < settings.zero_snap * instance.ran_capacity[c]) a.ran(s, c) = 0.0;
    }
  }
  result.allocation = std::move(a);
  result.utilities = utilities(instance, result.allocation);
  result.objective_value = 0.0;
  for (std::size_t s = 0; s < L.S; ++s) {
    result.social_welfare += result.utilities[s];
    result.objective_value += weights[s] * result.utilities[s];
  }
  return result;
}

}  // namespace edgemarket
