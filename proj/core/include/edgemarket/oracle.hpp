#pragma once

#include <cstddef>
#include <stdexcept>

#include "edgemarket/analysis.hpp"
#include "edgemarket/model.hpp"

namespace edgemarket {

/// Raised when an instance is too large for exhaustive search.
class OracleSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest instance the exhaustive routines accept.
struct OracleLimits {
  std::size_t providers = 3;
  std::size_t nodes = 2;
  std::size_t cells = 2;
  std::size_t resource_types = 4;
  std::size_t grid_points = 10'000'000;
};

struct OracleResult {
  UtilityVector utilities;
  double log_nsw = 0.0;
  /// Per-coordinate error estimate: the largest grid step, or the change of
  /// the last provider's utility across one step of every gridded
  /// coordinate around the best point, whichever is larger; never below
  /// 1e-9 x the largest standalone utility.
  double error_bound = 0.0;
  std::size_t grid_points = 0;
};

/// Maximises prod_s u_s^B_s by exhaustive search. Utilities of all but the
/// last provider run over a grid with step grid_resolution x standalone
/// utility; the last provider's utility is the largest one the remaining
/// capacity supports, found exactly by enumerating vertices of the
/// job-placement polytope. Throws OracleSizeError beyond `limits`.
[[nodiscard]] OracleResult brute_force_nsw_oracle(const MarketInstance& instance,
                                                  double grid_resolution,
                                                  const OracleLimits& limits = {});

/// Largest utility `provider` can reach while every other provider s keeps
/// exactly u[s]; negative when the others' targets are already infeasible.
[[nodiscard]] double max_utility_given_others(const MarketInstance& instance,
                                              const UtilityVector& u, std::size_t provider,
                                              const OracleLimits& limits = {});

/// Fails if some provider could gain more than oracle_resolution x (max
/// standalone utility) with nobody else losing. Also reports how far `u`
/// itself is from feasible.
[[nodiscard]] Certificate check_pareto(const MarketInstance& instance, const UtilityVector& u,
                                       double oracle_resolution,
                                       const OracleLimits& limits = {});

}  // namespace edgemarket
