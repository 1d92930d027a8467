#pragma once

#include "edgemarket/eg_solver.hpp"
#include "edgemarket/model.hpp"
#include "edgemarket/result.hpp"

namespace edgemarket {

/// Static baseline: every provider receives B_s / sum B of every good.
/// Utilities follow from the bottleneck utility; capacity is exhausted.
[[nodiscard]] MechanismResult allocate_proportional_sharing(const MarketInstance& instance);

/// Runs one mechanism. ME carries prices; SO uses unit weights and WSO
/// uses the budgets as weights. Utilities are re-evaluated from the
/// returned allocation for every mechanism.
[[nodiscard]] MechanismResult run_mechanism(const MarketInstance& instance, Mechanism mechanism,
                                            const SolverSettings& settings = {});

/// ME result together with the full equilibrium solution it came from.
struct EquilibriumRun {
  EquilibriumSolution solution;
  MechanismResult result;
};
[[nodiscard]] EquilibriumRun run_market_equilibrium(const MarketInstance& instance,
                                                    const SolverSettings& settings = {});

/// Builds the ME MechanismResult view of an equilibrium solution.
[[nodiscard]] MechanismResult to_mechanism_result(const MarketInstance& instance,
                                                  const EquilibriumSolution& solution);

}  // namespace edgemarket
