#include "edgemarket/mechanisms.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace edgemarket {

std::string_view to_string(Mechanism mechanism) noexcept {
  switch (mechanism) {
    case Mechanism::me: return "ME";
    case Mechanism::so: return "SO";
    case Mechanism::wso: return "WSO";
    case Mechanism::ps: return "PS";
  }
  return "?";
}

std::optional<Mechanism> parse_mechanism(std::string_view text) noexcept {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "ME") return Mechanism::me;
  if (upper == "SO") return Mechanism::so;
  if (upper == "WSO") return Mechanism::wso;
  if (upper == "PS") return Mechanism::ps;
  return std::nullopt;
}

std::string_view to_string(SolverStatus status) noexcept {
  switch (status) {
    case SolverStatus::converged: return "converged";
    case SolverStatus::max_iterations: return "max-iterations";
    case SolverStatus::infeasible_numerics: return "infeasible-numerics";
  }
  return "?";
}

MechanismResult allocate_proportional_sharing(const MarketInstance& instance) {
  instance.check_dimensions();
  const double total = instance.total_budget();
  Allocation a(instance);
  for (std::size_t s = 0; s < instance.providers(); ++s) {
    const double share = instance.budgets[s] / total;
    for (std::size_t m = 0; m < instance.nodes(); ++m) {
      for (std::size_t r = 0; r < instance.resource_types(); ++r) {
        a.mec(s, m, r) = share * instance.mec_capacity(m, r);
      }
    }
    for (std::size_t c = 0; c < instance.cells(); ++c) a.ran(s, c) = share * instance.ran_capacity[c];
  }
  MechanismResult result;
  result.mechanism = Mechanism::ps;
  result.utilities = utilities(instance, a);
  result.allocation = std::move(a);
  for (double u : result.utilities) result.social_welfare += u;
  result.objective_value = result.social_welfare;
  return result;
}

MechanismResult to_mechanism_result(const MarketInstance& instance,
                                    const EquilibriumSolution& solution) {
  MechanismResult result;
  result.mechanism = Mechanism::me;
  result.status = solution.solver_status;
  result.iterations = solution.iterations;
  result.allocation = solution.allocation;
  result.prices = solution.prices();
  if (solution.allocation.matches(instance)) {
    result.utilities = utilities(instance, solution.allocation);
    for (double u : result.utilities) result.social_welfare += u;
  }
  result.objective_value = solution.objective_value;
  return result;
}

EquilibriumRun run_market_equilibrium(const MarketInstance& instance,
                                      const SolverSettings& settings) {
  EquilibriumRun run;
  run.solution = solve_eg(instance, settings);
  run.result = to_mechanism_result(instance, run.solution);
  return run;
}

MechanismResult run_mechanism(const MarketInstance& instance, Mechanism mechanism,
                              const SolverSettings& settings) {
  switch (mechanism) {
    case Mechanism::me:
      return run_market_equilibrium(instance, settings).result;
    case Mechanism::so: {
      const std::vector<double> ones(instance.providers(), 1.0);
      return solve_linear(instance, ones, settings);
    }
    case Mechanism::wso: {
      auto result = solve_linear(instance, instance.budgets, settings);
      result.mechanism = Mechanism::wso;
      return result;
    }
    case Mechanism::ps:
      return allocate_proportional_sharing(instance);
  }
  throw std::invalid_argument("unknown mechanism");
}

}  // namespace edgemarket
