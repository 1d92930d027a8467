#pragma once

#include <cstdint>
#include <span>

#include "edgemarket/model.hpp"
#include "edgemarket/result.hpp"

namespace edgemarket {

enum class InitialPoint {
  proportional,  ///< half of the budget-proportional share of every good
  random,        ///< half of a random (seeded) split of every good
};

struct SolverSettings {
  double kkt_tolerance = 1e-6;
  double utility_floor = 1e-9;
  std::size_t max_iterations = 200;
  double step_fraction = 0.99;
  InitialPoint initial_point = InitialPoint::proportional;
  std::uint64_t seed = 0;
  /// LP solutions: entries below zero_snap x capacity are set to zero.
  double zero_snap = 1e-9;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// Optimum of the Eisenberg-Gale program together with its dual prices.
struct EquilibriumSolution {
  Allocation allocation;
  UtilityVector utilities;  ///< program variables u_s
  Matrix job_split;         ///< S x M, j_{s,m}
  Matrix mec_prices;        ///< M x R, p^MEC_{m,r} >= 0
  std::vector<double> ran_prices;  ///< C, p^RAN_c >= 0
  double objective_value = 0.0;    ///< sum_s B_s log u_s
  SolverStatus solver_status = SolverStatus::infeasible_numerics;
  std::size_t iterations = 0;
  /// max of the interior-point dual, primal and complementarity residuals
  double solver_residual = 0.0;
  /// primal objective minus Lagrange dual value, from the solver multipliers
  double duality_gap = 0.0;

  [[nodiscard]] Prices prices() const { return {mec_prices, ran_prices}; }
};

/// Maximises sum_s B_s log u_s over the bottleneck-linearised constraint
/// set (job split per node and resource, MEC and RAN bottlenecks,
/// capacities, non-negativity). Prices are the capacity multipliers.
///
/// Throws InstanceError on a malformed instance; a non-converged run is
/// reported through `solver_status` with the last iterate.
[[nodiscard]] EquilibriumSolution solve_eg(const MarketInstance& instance,
                                           const SolverSettings& settings = {});

/// Maximises sum_s weights_s u_s over the same constraint set. Only the
/// optimal value is unique; which optimal allocation is returned is
/// solver-dependent. Tagged Mechanism::so; callers re-tag for WSO.
[[nodiscard]] MechanismResult solve_linear(const MarketInstance& instance,
                                           std::span<const double> weights,
                                           const SolverSettings& settings = {});

}  // namespace edgemarket
