#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edgemarket/eg_solver.hpp"
#include "edgemarket/model.hpp"
#include "edgemarket/result.hpp"

namespace edgemarket {

/// One tolerance-parameterised condition of a certificate.
struct CheckResult {
  std::string name;
  double residual = 0.0;  ///< how far the condition is from holding (>= 0)
  double tolerance = 0.0;
  bool passed = false;
};

struct Certificate {
  std::string name;
  /// False when the property is not defined for the instance (e.g.
  /// envy-freeness with unequal budgets); such a certificate has no checks.
  bool applicable = true;
  std::vector<CheckResult> checks;
  std::string note;

  [[nodiscard]] bool passed() const noexcept;
  [[nodiscard]] double max_residual() const noexcept;
};

/// Builds an EquilibriumSolution-shaped candidate from an arbitrary
/// allocation and price vector: job_split is min_r x / d per node and the
/// utilities are the bottleneck utilities of the allocation.
[[nodiscard]] EquilibriumSolution candidate_solution(const MarketInstance& instance,
                                                     const Allocation& allocation,
                                                     const Prices& prices);

/// Cost of one job per node (q) and per cell (w), at the given prices.
struct BangPerBuckReport {
  Matrix node_cost;   ///< S x M, q_{s,m} = sum_r p^MEC_{m,r} d^MEC_{s,r}
  Matrix cell_cost;   ///< S x C, w_{s,c} = p^RAN_c d^RAN_{s,c}
  std::vector<double> min_job_cost;  ///< min over (m, c) of q_{s,m} + w_{s,c}
  std::vector<double> budget_per_utility;  ///< B_s / u_s (inf when u_s = 0)
};
[[nodiscard]] BangPerBuckReport bang_per_buck(const MarketInstance& instance,
                                              const Prices& prices, const UtilityVector& u);

/// Conditions (a) cheapest-job purchases, (b) market clearing,
/// (c) budget exhaustion, plus primal feasibility of the allocation.
/// Evaluated on the allocation and prices only; utilities and job splits
/// are recomputed from the allocation.
[[nodiscard]] Certificate check_market_equilibrium(const MarketInstance& instance,
                                                   const EquilibriumSolution& solution,
                                                   double tol = 1e-5);

/// Residuals of the KKT system of the equilibrium program, with the
/// multipliers recovered from the prices. All entries are >= 0.
struct KktResiduals {
  double stationarity_utility = 0.0;  ///< B/u - lambda_d - lambda_e
  double stationarity_price = 0.0;    ///< lambda_b / d - p + nu_f
  double stationarity_cell = 0.0;     ///< lambda_e / d - p_c + nu_g
  double stationarity_node = 0.0;     ///< lambda_d - sum_r lambda_b + nu_h
  double complementarity_capacity = 0.0;
  double complementarity_sign = 0.0;
  double complementarity_linking = 0.0;  ///< split and bottleneck rows
  double dual_feasibility = 0.0;
  double primal_feasibility = 0.0;
  double max_abs = 0.0;
};

/// Variables count as positive above this threshold.
inline constexpr double positive_threshold = 1e-8;

[[nodiscard]] KktResiduals kkt_residuals(const MarketInstance& instance,
                                         const EquilibriumSolution& solution);

/// sum_s B_s log u_s; -inf if some u_s is 0. Throws std::invalid_argument
/// on a negative utility or mismatched lengths.
[[nodiscard]] double log_nash_social_welfare(std::span<const double> utilities,
                                             std::span<const double> budgets);
/// prod_s u_s^B_s, evaluated as exp of the log form.
[[nodiscard]] double nash_social_welfare(std::span<const double> utilities,
                                         std::span<const double> budgets);

/// SW(result) / SW(so_result); nullopt when SW(so_result) is 0.
[[nodiscard]] std::optional<double> efficiency(const MechanismResult& result,
                                               const MechanismResult& so_result);

/// Random allocation splitting every good completely among the providers.
[[nodiscard]] Allocation random_feasible_allocation(const MarketInstance& instance,
                                                    std::uint64_t seed);

/// Max over the alternatives of sum_s B_s (u'_s - u_s) / u_s, where the
/// alternatives are `alternatives` plus `samples` random feasible
/// allocations. Passes when that maximum is <= tol (default 1e-6 sum B).
[[nodiscard]] Certificate check_proportional_fairness(
    const MarketInstance& instance, const UtilityVector& u, std::size_t samples,
    std::uint64_t seed, std::span<const UtilityVector> alternatives = {},
    std::optional<double> tol = std::nullopt);

/// u_s(bundle of t) <= u_s(own bundle) + tol for all s, t; not applicable
/// unless all budgets are equal.
[[nodiscard]] Certificate check_envy_freeness(const MarketInstance& instance,
                                              const Allocation& allocation, double tol = 1e-6);

/// Utility `provider` would get from the bundle held by `owner`.
[[nodiscard]] double utility_of_bundle(const MarketInstance& instance,
                                       const Allocation& allocation, std::size_t provider,
                                       std::size_t owner);

struct MechanismMetrics {
  Mechanism mechanism = Mechanism::me;
  double social_welfare = 0.0;
  double nsw_log = 0.0;  ///< -inf when some provider gets nothing
  std::optional<double> efficiency;  ///< against SO
  std::size_t zero_utility_providers = 0;
};

/// Per-instance metrics over a set of mechanism results plus the
/// certificates evaluated on them.
struct MetricsReport {
  std::string instance_id;
  std::size_t providers = 0;
  std::vector<MechanismMetrics> mechanisms;
  std::vector<Certificate> certificates;
  std::optional<KktResiduals> kkt;

  [[nodiscard]] const MechanismMetrics* find(Mechanism mechanism) const noexcept;
};

struct MetricsOptions {
  double kkt_tolerance = 1e-6;
  double equilibrium_tolerance = 1e-5;
  double ordering_tolerance = 1e-6;
  std::size_t fairness_samples = 16;
  std::uint64_t seed = 0;
  bool certificates = true;  ///< false computes the metrics only
};

/// Efficiencies need an SO result in `results`; the certificates (KKT,
/// market equilibrium, sharing incentive, welfare ordering, NSW
/// maximality, proportional fairness, envy-freeness) need an ME result with
/// prices and are skipped for mechanisms that are absent.
[[nodiscard]] MetricsReport compute_metrics(std::string instance_id,
                                            const MarketInstance& instance,
                                            std::span<const MechanismResult> results,
                                            const MetricsOptions& options = {});

/// Batch statistics. The price-of-anarchy figure is 1 / min eta_me over
/// the batch, an empirical proxy only: the true value is a worst case
/// over all instances.
struct BatchSummary {
  std::size_t instances = 0;
  std::optional<double> mean_efficiency_me;
  std::optional<double> mean_efficiency_ps;
  std::optional<double> min_efficiency_me;
  std::optional<double> empirical_poa;
  double mean_zero_fraction_so = 0.0;  ///< share of providers with u = 0 under SO
  std::size_t failed_certificates = 0;
};
[[nodiscard]] BatchSummary summarize(std::span<const MetricsReport> reports);

}  // namespace edgemarket
