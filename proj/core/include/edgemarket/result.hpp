#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edgemarket/model.hpp"

namespace edgemarket {

enum class Mechanism {
  me,   ///< market equilibrium (Eisenberg-Gale program)
  so,   ///< social optimum, max sum of utilities
  wso,  ///< budget-weighted social optimum
  ps,   ///< proportional sharing
};

[[nodiscard]] std::string_view to_string(Mechanism mechanism) noexcept;
/// Accepts "ME", "SO", "WSO", "PS" (case-insensitive).
[[nodiscard]] std::optional<Mechanism> parse_mechanism(std::string_view text) noexcept;

enum class SolverStatus { converged, max_iterations, infeasible_numerics };

[[nodiscard]] std::string_view to_string(SolverStatus status) noexcept;

/// Unit prices of every good: p^MEC (M x R) and p^RAN (C).
struct Prices {
  Matrix mec;
  std::vector<double> ran;
};

struct MechanismResult {
  Mechanism mechanism = Mechanism::me;
  UtilityVector utilities;  ///< always re-evaluated from `allocation`
  Allocation allocation;
  double social_welfare = 0.0;  ///< sum of utilities
  /// Value of the mechanism's own objective: sum B log u (ME),
  /// sum w u (SO / WSO), sum u (PS).
  double objective_value = 0.0;
  std::optional<Prices> prices;  ///< ME only
  SolverStatus status = SolverStatus::converged;
  std::size_t iterations = 0;
};

}  // namespace edgemarket
