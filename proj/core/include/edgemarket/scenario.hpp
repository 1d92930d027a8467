#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "edgemarket/model.hpp"

namespace edgemarket {

/// Per-job demand profile and budget of one kind of service.
struct ServiceTemplate {
  std::string name;
  double cpu_per_job = 0.0;  ///< cores
  double ram_per_job = 0.0;  ///< GB
  double ran_per_job = 0.0;  ///< MHz, same in every cell
  double budget = 0.0;

  friend bool operator==(const ServiceTemplate&, const ServiceTemplate&) = default;
};

ServiceTemplate cpu_intensive();
ServiceTemplate ram_intensive();
ServiceTemplate bw_intensive();
ServiceTemplate balanced();
/// The four templates above, in that order.
std::vector<ServiceTemplate> standard_templates();

struct CellGroup {
  std::size_t count = 0;
  double bandwidth_mhz = 0.0;
};

struct NodeGroup {
  std::size_t count = 0;
  double cores = 0.0;
  double ram_gb = 0.0;
};

/// Network layout plus how providers are drawn. Defaults are the
/// heterogeneous deployment of the main experiment: 2 x 40 MHz and
/// 5 x 20 MHz cells, 5 CPU nodes (32 cores, 128 GB), 5 RAM nodes (16 cores,
/// 256 GB), 15 providers, relative demand noise 0.25.
struct DeploymentTemplate {
  CellGroup large_cells{2, 40.0};
  CellGroup small_cells{5, 20.0};
  NodeGroup cpu_nodes{5, 32.0, 128.0};
  NodeGroup ram_nodes{5, 16.0, 256.0};
  std::size_t provider_count = 15;
  double noise_relative = 0.25;  ///< relative standard deviation
  double noise_floor = 0.05;     ///< draws are clamped to floor x nominal
  /// Independent RAN noise per (provider, cell); false shares one draw
  /// across all cells of a provider.
  bool per_cell_ran_noise = true;
  std::uint64_t seed = 0;
  std::vector<ServiceTemplate> catalogue = standard_templates();

  /// Throws std::invalid_argument on an unusable layout.
  void validate() const;
};

/// Cells are ordered large then small, nodes CPU then RAM; resource 0 is
/// CPU cores and resource 1 is RAM. Provider s gets `assignment[s]`;
/// every demand entry is multiplied by max(floor, 1 + noise x N(0,1)).
/// Budgets are exact.
[[nodiscard]] MarketInstance generate_instance(const DeploymentTemplate& deployment,
                                               std::span<const ServiceTemplate> assignment,
                                               std::uint64_t seed);

/// As above with deployment.provider_count templates drawn uniformly
/// from deployment.catalogue.
[[nodiscard]] MarketInstance generate_instance(const DeploymentTemplate& deployment,
                                               std::uint64_t seed);

/// Seed of instance `index` in a batch started from `seed`.
[[nodiscard]] std::uint64_t instance_seed(std::uint64_t seed, std::size_t index) noexcept;

/// 1.0, 1.5, ..., 5.0.
[[nodiscard]] std::vector<double> default_budget_values();

/// One copy of `base` per value with the budget of `provider` replaced.
[[nodiscard]] std::vector<MarketInstance> sweep_budget(const MarketInstance& base,
                                                       std::size_t provider,
                                                       std::span<const double> values);

/// Each schedule step lists indices (into `base`) of nodes to remove; steps
/// accumulate. Returns base followed by one instance per step.
[[nodiscard]] std::vector<MarketInstance> sweep_nodes(
    const MarketInstance& base, const std::vector<std::vector<std::size_t>>& schedule);
[[nodiscard]] std::vector<MarketInstance> sweep_cells(
    const MarketInstance& base, const std::vector<std::vector<std::size_t>>& schedule);

/// Removes one CPU node and one RAM node per step, last ones first, until
/// one of each is left.
[[nodiscard]] std::vector<std::vector<std::size_t>> paired_node_schedule(
    const DeploymentTemplate& deployment);
/// Removes small cells one per step, last ones first, until one is left.
[[nodiscard]] std::vector<std::vector<std::size_t>> small_cell_schedule(
    const DeploymentTemplate& deployment);

}  // namespace edgemarket
