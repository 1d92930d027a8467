#include "edgemarket/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace edgemarket {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kUtilityFloor = 1e-9;

void require_prices(const MarketInstance& instance, const Matrix& mec, std::span<const double> ran) {
  if (mec.rows() != instance.nodes() || mec.cols() != instance.resource_types() ||
      ran.size() != instance.cells()) {
    throw InstanceError("price vector does not match the instance");
  }
}

void require_allocation(const MarketInstance& instance, const Allocation& allocation) {
  if (!allocation.matches(instance)) throw InstanceError("allocation does not match the instance");
}

CheckResult make_check(std::string name, double residual, double tol) {
  return {std::move(name), residual, tol, residual <= tol};
}

Matrix derived_job_split(const MarketInstance& instance, const Allocation& a) {
  Matrix j(instance.providers(), instance.nodes());
  for (std::size_t s = 0; s < instance.providers(); ++s) {
    for (std::size_t m = 0; m < instance.nodes(); ++m) {
      double jobs = kInf;
      for (std::size_t r = 0; r < instance.resource_types(); ++r) {
        jobs = std::min(jobs, a.mec(s, m, r) / instance.mec_demand(s, r));
      }
      j(s, m) = instance.resource_types() ? std::max(jobs, 0.0) : 0.0;
    }
  }
  return j;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

bool Certificate::passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

double Certificate::max_residual() const noexcept {
  double worst = 0.0;
  for (const auto& c : checks) worst = std::max(worst, c.residual);
  return worst;
}

EquilibriumSolution candidate_solution(const MarketInstance& instance,
                                       const Allocation& allocation, const Prices& prices) {
  require_allocation(instance, allocation);
  require_prices(instance, prices.mec, prices.ran);
  EquilibriumSolution sol;
  sol.allocation = allocation;
  sol.utilities = utilities(instance, allocation);
  sol.job_split = derived_job_split(instance, allocation);
  sol.mec_prices = prices.mec;
  sol.ran_prices = prices.ran;
  return sol;
}

BangPerBuckReport bang_per_buck(const MarketInstance& instance, const Prices& prices,
                                const UtilityVector& u) {
  require_prices(instance, prices.mec, prices.ran);
  if (u.size() != instance.providers()) throw InstanceError("utility vector has the wrong length");
  const auto S = instance.providers();
  BangPerBuckReport rep;
  rep.node_cost = Matrix(S, instance.nodes());
  rep.cell_cost = Matrix(S, instance.cells());
  rep.min_job_cost.assign(S, 0.0);
  rep.budget_per_utility.assign(S, kInf);
  for (std::size_t s = 0; s < S; ++s) {
    double q_min = kInf;
    for (std::size_t m = 0; m < instance.nodes(); ++m) {
      double q = 0.0;
      for (std::size_t r = 0; r < instance.resource_types(); ++r) {
        q += prices.mec(m, r) * instance.mec_demand(s, r);
      }
      rep.node_cost(s, m) = q;
      q_min = std::min(q_min, q);
    }
    double w_min = kInf;
    for (std::size_t c = 0; c < instance.cells(); ++c) {
      rep.cell_cost(s, c) = prices.ran[c] * instance.ran_demand(s, c);
      w_min = std::min(w_min, rep.cell_cost(s, c));
    }
    rep.min_job_cost[s] = q_min + w_min;
    if (u[s] > 0.0) rep.budget_per_utility[s] = instance.budgets[s] / u[s];
  }
  return rep;
}

Certificate check_market_equilibrium(const MarketInstance& instance,
                                     const EquilibriumSolution& solution, double tol) {
  const auto& a = solution.allocation;
  require_allocation(instance, a);
  require_prices(instance, solution.mec_prices, solution.ran_prices);
  const auto S = instance.providers();
  const auto M = instance.nodes();
  const auto R = instance.resource_types();
  const auto C = instance.cells();

  const UtilityVector u = utilities(instance, a);
  const Matrix j = derived_job_split(instance, a);
  const Prices prices{solution.mec_prices, solution.ran_prices};
  const auto bpb = bang_per_buck(instance, prices, u);

  double cheapest = 0.0;  // B/u above the cheapest job
  double purchased = 0.0;  // purchased (node, cell) pairs priced off B/u
  double budget = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    const double per_job = instance.budgets[s] / std::max(u[s], kUtilityFloor);
    cheapest = std::max(cheapest, per_job - bpb.min_job_cost[s]);
    for (std::size_t m = 0; m < M; ++m) {
      if (j(s, m) <= positive_threshold) continue;
      for (std::size_t c = 0; c < C; ++c) {
        if (a.ran(s, c) <= positive_threshold) continue;
        purchased = std::max(purchased,
                             std::abs(per_job - bpb.node_cost(s, m) - bpb.cell_cost(s, c)));
      }
    }
    double spend = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      for (std::size_t r = 0; r < R; ++r) spend += solution.mec_prices(m, r) * a.mec(s, m, r);
    }
    for (std::size_t c = 0; c < C; ++c) spend += solution.ran_prices[c] * a.ran(s, c);
    budget = std::max(budget, std::abs(spend - instance.budgets[s]) / instance.budgets[s]);
  }

  double clearing = 0.0;
  double excess = 0.0;
  auto clear = [&](double price, double used, double capacity) {
    const double slack = (capacity - used) / capacity;
    clearing = std::max(clearing, std::max(0.0, std::min(price, slack)));
    excess = std::max(excess, -slack);
  };
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t r = 0; r < R; ++r) {
      double used = 0.0;
      for (std::size_t s = 0; s < S; ++s) used += a.mec(s, m, r);
      clear(solution.mec_prices(m, r), used, instance.mec_capacity(m, r));
    }
  }
  for (std::size_t c = 0; c < C; ++c) {
    double used = 0.0;
    for (std::size_t s = 0; s < S; ++s) used += a.ran(s, c);
    clear(solution.ran_prices[c], used, instance.ran_capacity[c]);
  }
  const auto gap = feasibility_gap(instance, a);

  Certificate cert;
  cert.name = "market_equilibrium";
  cert.checks.push_back(make_check("cheapest_job", std::max(0.0, cheapest), tol));
  cert.checks.push_back(make_check("purchased_at_min_cost", purchased, tol));
  cert.checks.push_back(make_check("market_clearing", clearing, tol));
  cert.checks.push_back(make_check("budget_exhaustion", budget, tol));
  cert.checks.push_back(make_check("feasibility", std::max({excess, 0.0, gap.negativity}), tol));
  return cert;
}

KktResiduals kkt_residuals(const MarketInstance& instance, const EquilibriumSolution& solution) {
  const auto& a = solution.allocation;
  require_allocation(instance, a);
  require_prices(instance, solution.mec_prices, solution.ran_prices);
  const auto S = instance.providers();
  const auto M = instance.nodes();
  const auto R = instance.resource_types();
  const auto C = instance.cells();
  const Matrix j = (solution.job_split.rows() == S && solution.job_split.cols() == M)
                       ? solution.job_split
                       : derived_job_split(instance, a);
  const UtilityVector u = solution.utilities.size() == S ? solution.utilities : utilities(instance, a);
  const Matrix& p = solution.mec_prices;
  const auto& pc = solution.ran_prices;

  KktResiduals k;
  auto bump = [](double& slot, double v) { slot = std::max(slot, std::abs(v)); };

  for (const double v : p.values()) bump(k.dual_feasibility, std::max(0.0, -v));
  for (const double v : pc) bump(k.dual_feasibility, std::max(0.0, -v));

  for (std::size_t s = 0; s < S; ++s) {
    const double us = std::max(u[s], kUtilityFloor);
    bump(k.primal_feasibility, std::max(0.0, -u[s]));

    // RAN bottleneck multiplier: cheapest purchased cell (any cell if none).
    double lambda_e = kInf;
    for (std::size_t c = 0; c < C; ++c) {
      if (a.ran(s, c) > positive_threshold) {
        lambda_e = std::min(lambda_e, pc[c] * instance.ran_demand(s, c));
      }
    }
    if (lambda_e == kInf) {
      for (std::size_t c = 0; c < C; ++c) {
        lambda_e = std::min(lambda_e, pc[c] * instance.ran_demand(s, c));
      }
    }
    const double per_job = instance.budgets[s] / us;
    const double lambda_d = std::max(0.0, per_job - lambda_e);
    bump(k.stationarity_utility, per_job - lambda_d - lambda_e);
    bump(k.dual_feasibility, std::max(0.0, -lambda_e));

    double mec_jobs_sum = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      double lambda_b_sum = 0.0;
      for (std::size_t r = 0; r < R; ++r) {
        const double d = instance.mec_demand(s, r);
        const double x = a.mec(s, m, r);
        const double lambda_b = p(m, r) * d;
        lambda_b_sum += lambda_b;
        const double nu_f = std::max(0.0, p(m, r) - lambda_b / d);
        bump(k.stationarity_price, lambda_b / d - p(m, r) + nu_f);
        bump(k.complementarity_sign, nu_f * x);
        bump(k.complementarity_linking, lambda_b * (x / d - j(s, m)));
        bump(k.primal_feasibility, std::max(0.0, j(s, m) - x / d));
        bump(k.primal_feasibility, std::max(0.0, -x));
      }
      const double nu_h_raw = lambda_b_sum - lambda_d;
      const double nu_h = std::max(0.0, nu_h_raw);
      bump(k.stationarity_node, lambda_d - lambda_b_sum + nu_h);
      bump(k.complementarity_sign, nu_h * j(s, m));
      bump(k.primal_feasibility, std::max(0.0, -j(s, m)));
      mec_jobs_sum += j(s, m);
    }

    double ran_jobs_sum = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      const double d = instance.ran_demand(s, c);
      const double y = a.ran(s, c);
      const double nu_g = std::max(0.0, pc[c] - lambda_e / d);
      bump(k.stationarity_cell, lambda_e / d - pc[c] + nu_g);
      bump(k.complementarity_sign, nu_g * y);
      bump(k.primal_feasibility, std::max(0.0, -y));
      ran_jobs_sum += y / d;
    }
    bump(k.complementarity_linking, lambda_d * (mec_jobs_sum - u[s]));
    bump(k.complementarity_linking, lambda_e * (ran_jobs_sum - u[s]));
    bump(k.primal_feasibility, std::max(0.0, u[s] - mec_jobs_sum));
    bump(k.primal_feasibility, std::max(0.0, u[s] - ran_jobs_sum));
  }

  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t r = 0; r < R; ++r) {
      double used = 0.0;
      for (std::size_t s = 0; s < S; ++s) used += a.mec(s, m, r);
      const double slack = instance.mec_capacity(m, r) - used;
      bump(k.complementarity_capacity, p(m, r) * slack);
      bump(k.primal_feasibility, std::max(0.0, -slack));
    }
  }
  for (std::size_t c = 0; c < C; ++c) {
    double used = 0.0;
    for (std::size_t s = 0; s < S; ++s) used += a.ran(s, c);
    const double slack = instance.ran_capacity[c] - used;
    bump(k.complementarity_capacity, pc[c] * slack);
    bump(k.primal_feasibility, std::max(0.0, -slack));
  }

  k.max_abs = std::max({k.stationarity_utility, k.stationarity_price, k.stationarity_cell,
                        k.stationarity_node, k.complementarity_capacity, k.complementarity_sign,
                        k.complementarity_linking, k.dual_feasibility, k.primal_feasibility});
  return k;
}

double log_nash_social_welfare(std::span<const double> utilities, std::span<const double> budgets) {
  if (utilities.size() != budgets.size()) {
    throw std::invalid_argument("utilities and budgets differ in length");
  }
  double total = 0.0;
  bool zero = false;
  for (std::size_t s = 0; s < utilities.size(); ++s) {
    if (utilities[s] < 0.0 || std::isnan(utilities[s])) {
      throw std::invalid_argument("negative utility for provider " + std::to_string(s));
    }
    if (utilities[s] == 0.0) {
      zero = true;
    } else {
      total += budgets[s] * std::log(utilities[s]);
    }
  }
  return zero ? -kInf : total;
}

double nash_social_welfare(std::span<const double> utilities, std::span<const double> budgets) {
  return std::exp(log_nash_social_welfare(utilities, budgets));
}

std::optional<double> efficiency(const MechanismResult& result, const MechanismResult& so_result) {
  if (!(so_result.social_welfare > 0.0)) return std::nullopt;
  return result.social_welfare / so_result.social_welfare;
}

Allocation random_feasible_allocation(const MarketInstance& instance, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> draw(1.0);
  const auto S = instance.providers();
  Allocation a(instance);
  std::vector<double> share(S);
  auto split = [&] {
    double total = 0.0;
    for (auto& v : share) total += (v = draw(rng));
    for (auto& v : share) v /= total;
  };
  for (std::size_t m = 0; m < instance.nodes(); ++m) {
    for (std::size_t r = 0; r < instance.resource_types(); ++r) {
      split();
      for (std::size_t s = 0; s < S; ++s) a.mec(s, m, r) = share[s] * instance.mec_capacity(m, r);
    }
  }
  for (std::size_t c = 0; c < instance.cells(); ++c) {
    split();
    for (std::size_t s = 0; s < S; ++s) a.ran(s, c) = share[s] * instance.ran_capacity[c];
  }
  return a;
}

Certificate check_proportional_fairness(const MarketInstance& instance, const UtilityVector& u,
                                        std::size_t samples, std::uint64_t seed,
                                        std::span<const UtilityVector> alternatives,
                                        std::optional<double> tol) {
  const auto S = instance.providers();
  if (u.size() != S) throw InstanceError("utility vector has the wrong length");
  const double limit = tol.value_or(1e-6 * instance.total_budget());
  Certificate cert;
  cert.name = "proportional_fairness";

  double smallest = kInf;
  for (double v : u) smallest = std::min(smallest, v);
  if (!(smallest > 0.0)) {
    cert.checks.push_back(make_check("positive_utilities", -std::min(smallest, 0.0) + 1.0, 0.0));
    cert.note = "undefined: some provider has zero utility";
    return cert;
  }

  double worst = -kInf;
  std::string worst_source;
  auto consider = [&](const UtilityVector& alt, const std::string& source) {
    if (alt.size() != S) throw InstanceError("alternative utility vector has the wrong length");
    double aggregate = 0.0;
    for (std::size_t s = 0; s < S; ++s) aggregate += instance.budgets[s] * (alt[s] - u[s]) / u[s];
    if (aggregate > worst) {
      worst = aggregate;
      worst_source = source;
    }
  };
  for (std::size_t i = 0; i < alternatives.size(); ++i) {
    consider(alternatives[i], "alternative " + std::to_string(i));
  }
  for (std::size_t i = 0; i < samples; ++i) {
    consider(utilities(instance, random_feasible_allocation(instance, seed + i)),
             "random sample " + std::to_string(i));
  }
  if (worst == -kInf) {
    cert.note = "no alternatives evaluated";
    return cert;
  }
  cert.checks.push_back(make_check("aggregate_proportional_change", std::max(0.0, worst), limit));
  cert.note = "max aggregate " + format_double(worst) + " from " + worst_source;
  return cert;
}

double utility_of_bundle(const MarketInstance& instance, const Allocation& allocation,
                         std::size_t provider, std::size_t owner) {
  require_allocation(instance, allocation);
  if (provider >= instance.providers() || owner >= instance.providers()) {
    throw InstanceError("provider index out of range");
  }
  double mec = 0.0;
  for (std::size_t m = 0; m < instance.nodes(); ++m) {
    double jobs = kInf;
    for (std::size_t r = 0; r < instance.resource_types(); ++r) {
      jobs = std::min(jobs, allocation.mec(owner, m, r) / instance.mec_demand(provider, r));
    }
    mec += jobs;
  }
  double ran = 0.0;
  for (std::size_t c = 0; c < instance.cells(); ++c) {
    ran += allocation.ran(owner, c) / instance.ran_demand(provider, c);
  }
  return std::min(mec, ran);
}

Certificate check_envy_freeness(const MarketInstance& instance, const Allocation& allocation,
                                double tol) {
  require_allocation(instance, allocation);
  Certificate cert;
  cert.name = "envy_freeness";
  const auto S = instance.providers();
  for (std::size_t s = 1; s < S; ++s) {
    if (std::abs(instance.budgets[s] - instance.budgets[0]) > 1e-12 * instance.budgets[0]) {
      cert.applicable = false;
      cert.note = "not applicable: budgets differ";
      return cert;
    }
  }
  double worst = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    const double own = utility_of_bundle(instance, allocation, s, s);
    for (std::size_t t = 0; t < S; ++t) {
      if (t != s) worst = std::max(worst, utility_of_bundle(instance, allocation, s, t) - own);
    }
  }
  cert.checks.push_back(make_check("envy", worst, tol));
  return cert;
}

const MechanismMetrics* MetricsReport::find(Mechanism mechanism) const noexcept {
  for (const auto& m : mechanisms) {
    if (m.mechanism == mechanism) return &m;
  }
  return nullptr;
}

MetricsReport compute_metrics(std::string instance_id, const MarketInstance& instance,
                              std::span<const MechanismResult> results,
                              const MetricsOptions& options) {
  MetricsReport report;
  report.instance_id = std::move(instance_id);
  report.providers = instance.providers();

  auto lookup = [&](Mechanism mech) -> const MechanismResult* {
    for (const auto& r : results) {
      if (r.mechanism == mech) return &r;
    }
    return nullptr;
  };
  const MechanismResult* me = lookup(Mechanism::me);
  const MechanismResult* so = lookup(Mechanism::so);
  const MechanismResult* ps = lookup(Mechanism::ps);

  for (const auto& r : results) {
    MechanismMetrics m;
    m.mechanism = r.mechanism;
    m.social_welfare = r.social_welfare;
    m.nsw_log = log_nash_social_welfare(r.utilities, instance.budgets);
    if (so) m.efficiency = efficiency(r, *so);
    m.zero_utility_providers = static_cast<std::size_t>(
        std::count_if(r.utilities.begin(), r.utilities.end(), [](double v) { return v <= 1e-9; }));
    report.mechanisms.push_back(m);
  }

  if (!options.certificates || !me || !me->prices) return report;

  const auto candidate = candidate_solution(instance, me->allocation, *me->prices);
  report.kkt = kkt_residuals(instance, candidate);
  {
    Certificate kkt;
    kkt.name = "kkt";
    kkt.checks.push_back(make_check("max_abs", report.kkt->max_abs, options.kkt_tolerance));
    report.certificates.push_back(std::move(kkt));
  }
  report.certificates.push_back(
      check_market_equilibrium(instance, candidate, options.equilibrium_tolerance));

  const double tol = options.ordering_tolerance;
  if (ps) {
    Certificate si;
    si.name = "sharing_incentive";
    double worst = 0.0;
    for (std::size_t s = 0; s < instance.providers(); ++s) {
      worst = std::max(worst, ps->utilities[s] - me->utilities[s]);
    }
    si.checks.push_back(make_check("shortfall_vs_proportional", worst, tol));
    report.certificates.push_back(std::move(si));
  }
  {
    Certificate order;
    order.name = "welfare_ordering";
    if (so) {
      order.checks.push_back(
          make_check("me_above_so", std::max(0.0, me->social_welfare - so->social_welfare), tol));
    }
    if (ps) {
      order.checks.push_back(
          make_check("ps_above_me", std::max(0.0, ps->social_welfare - me->social_welfare), tol));
    }
    if (!order.checks.empty()) report.certificates.push_back(std::move(order));
  }
  {
    Certificate nsw;
    nsw.name = "nsw_maximality";
    const double me_log = log_nash_social_welfare(me->utilities, instance.budgets);
    for (const auto& r : results) {
      if (r.mechanism == Mechanism::me) continue;
      const double other = log_nash_social_welfare(r.utilities, instance.budgets);
      const double excess = other == -kInf ? 0.0 : std::max(0.0, other - me_log);
      nsw.checks.push_back(make_check("me_vs_" + std::string(to_string(r.mechanism)), excess,
                                      tol * std::max(1.0, std::abs(me_log))));
    }
    if (!nsw.checks.empty()) report.certificates.push_back(std::move(nsw));
  }
  {
    std::vector<UtilityVector> alternatives;
    for (const auto& r : results) {
      if (r.mechanism != Mechanism::me) alternatives.push_back(r.utilities);
    }
    report.certificates.push_back(check_proportional_fairness(
        instance, me->utilities, options.fairness_samples, options.seed, alternatives));
  }
  report.certificates.push_back(check_envy_freeness(instance, me->allocation));
  return report;
}

BatchSummary summarize(std::span<const MetricsReport> reports) {
  BatchSummary out;
  out.instances = reports.size();
  double sum_me = 0.0, sum_ps = 0.0, zero_so = 0.0;
  std::size_t n_me = 0, n_ps = 0, n_so = 0;
  double min_me = kInf;
  for (const auto& rep : reports) {
    if (const auto* m = rep.find(Mechanism::me); m && m->efficiency) {
      sum_me += *m->efficiency;
      min_me = std::min(min_me, *m->efficiency);
      ++n_me;
    }
    if (const auto* m = rep.find(Mechanism::ps); m && m->efficiency) {
      sum_ps += *m->efficiency;
      ++n_ps;
    }
    if (const auto* m = rep.find(Mechanism::so); m && rep.providers > 0) {
      zero_so += static_cast<double>(m->zero_utility_providers) / static_cast<double>(rep.providers);
      ++n_so;
    }
    for (const auto& c : rep.certificates) {
      if (c.applicable && !c.passed()) {
        ++out.failed_certificates;
        break;
      }
    }
  }
  if (n_me) {
    out.mean_efficiency_me = sum_me / static_cast<double>(n_me);
    out.min_efficiency_me = min_me;
    if (min_me > 0.0) out.empirical_poa = 1.0 / min_me;
  }
  if (n_ps) out.mean_efficiency_ps = sum_ps / static_cast<double>(n_ps);
  if (n_so) out.mean_zero_fraction_so = zero_so / static_cast<double>(n_so);
  return out;
}

}  // namespace edgemarket
