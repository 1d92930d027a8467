#include "edgemarket/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

namespace edgemarket {

namespace {

// Normal and index draws built on the raw mt19937_64 stream, whose output
// sequence is fixed by the standard (the <random> distributions are not),
// so instances are identical across standard libraries.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  double uniform() {  // (0, 1)
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (spare_) {
      spare_ = false;
      return cached_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    cached_ = radius * std::sin(angle);
    spare_ = true;
    return radius * std::cos(angle);
  }

  std::size_t index(std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
  }

 private:
  std::mt19937_64 engine_;
  bool spare_ = false;
  double cached_ = 0.0;
};

double noisy(Stream& rng, double nominal, const DeploymentTemplate& d) {
  if (d.noise_relative == 0.0) return nominal;
  const double factor = 1.0 + d.noise_relative * rng.normal();
  return nominal * std::max(d.noise_floor, factor);
}

void check_template(const ServiceTemplate& t) {
  if (!(t.cpu_per_job > 0.0 && t.ram_per_job > 0.0 && t.ran_per_job > 0.0 && t.budget > 0.0)) {
    throw std::invalid_argument("service template '" + t.name + "' needs positive demands and budget");
  }
}

std::vector<std::size_t> kept_indices(std::size_t total, const std::set<std::size_t>& removed) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < total; ++i) {
    if (!removed.count(i)) kept.push_back(i);
  }
  return kept;
}

MarketInstance keep_nodes(const MarketInstance& base, const std::vector<std::size_t>& kept) {
  MarketInstance out = base;
  out.mec_capacity = Matrix(kept.size(), base.resource_types());
  out.node_names.clear();
  for (std::size_t i = 0; i < kept.size(); ++i) {
    for (std::size_t r = 0; r < base.resource_types(); ++r) {
      out.mec_capacity(i, r) = base.mec_capacity(kept[i], r);
    }
    if (!base.node_names.empty()) out.node_names.push_back(base.node_names[kept[i]]);
  }
  return out;
}

MarketInstance keep_cells(const MarketInstance& base, const std::vector<std::size_t>& kept) {
  MarketInstance out = base;
  out.ran_capacity.clear();
  out.cell_names.clear();
  out.ran_demand = Matrix(base.providers(), kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    out.ran_capacity.push_back(base.ran_capacity[kept[i]]);
    if (!base.cell_names.empty()) out.cell_names.push_back(base.cell_names[kept[i]]);
    for (std::size_t s = 0; s < base.providers(); ++s) {
      out.ran_demand(s, i) = base.ran_demand(s, kept[i]);
    }
  }
  return out;
}

template <typename Keep>
std::vector<MarketInstance> shrink(const MarketInstance& base,
                                   const std::vector<std::vector<std::size_t>>& schedule,
                                   std::size_t total, const char* what, Keep keep) {
  base.check_dimensions();
  std::vector<MarketInstance> out{base};
  std::set<std::size_t> removed;
  for (const auto& step : schedule) {
    for (std::size_t idx : step) {
      if (idx >= total) {
        throw std::invalid_argument(std::string("no ") + what + " with index " + std::to_string(idx));
      }
      if (!removed.insert(idx).second) {
        throw std::invalid_argument(std::string(what) + " " + std::to_string(idx) +
                                    " is removed twice");
      }
    }
    if (removed.size() >= total) {
      throw std::invalid_argument(std::string("schedule removes the last ") + what);
    }
    out.push_back(keep(base, kept_indices(total, removed)));
  }
  return out;
}

}  // namespace

ServiceTemplate cpu_intensive() { return {"CPU-Intensive", 4.0, 8.0, 3.0, 1.0}; }
ServiceTemplate ram_intensive() { return {"RAM-Intensive", 1.0, 32.0, 3.0, 1.0}; }
ServiceTemplate bw_intensive() { return {"BW-Intensive", 1.0, 8.0, 10.0, 1.5}; }
ServiceTemplate balanced() { return {"Balanced", 5.0, 40.0, 5.0, 2.0}; }

std::vector<ServiceTemplate> standard_templates() {
  return {cpu_intensive(), ram_intensive(), bw_intensive(), balanced()};
}

void DeploymentTemplate::validate() const {
  if (large_cells.count + small_cells.count == 0) {
    throw std::invalid_argument("deployment needs at least one cell");
  }
  if (cpu_nodes.count + ram_nodes.count == 0) {
    throw std::invalid_argument("deployment needs at least one edge node");
  }
  if ((large_cells.count && !(large_cells.bandwidth_mhz > 0.0)) ||
      (small_cells.count && !(small_cells.bandwidth_mhz > 0.0))) {
    throw std::invalid_argument("cell bandwidth must be positive");
  }
  for (const auto* g : {&cpu_nodes, &ram_nodes}) {
    if (g->count && !(g->cores > 0.0 && g->ram_gb > 0.0)) {
      throw std::invalid_argument("node capacities must be positive");
    }
  }
  if (!(noise_relative >= 0.0)) throw std::invalid_argument("noise_relative must be >= 0");
  if (!(noise_floor > 0.0 && noise_floor <= 1.0)) {
    throw std::invalid_argument("noise_floor must lie in (0, 1]");
  }
  for (const auto& t : catalogue) check_template(t);
}

MarketInstance generate_instance(const DeploymentTemplate& deployment,
                                 std::span<const ServiceTemplate> assignment, std::uint64_t seed) {
  deployment.validate();
  if (assignment.empty()) throw std::invalid_argument("no providers to generate");
  for (const auto& t : assignment) check_template(t);

  MarketInstance in;
  const std::size_t M = deployment.cpu_nodes.count + deployment.ram_nodes.count;
  in.mec_capacity = Matrix(M, 2);
  in.resource_names = {"cpu", "ram"};
  std::size_t m = 0;
  for (const auto& [group, label] : {std::pair{&deployment.cpu_nodes, "cpu"},
                                     std::pair{&deployment.ram_nodes, "ram"}}) {
    for (std::size_t i = 0; i < group->count; ++i, ++m) {
      in.mec_capacity(m, 0) = group->cores;
      in.mec_capacity(m, 1) = group->ram_gb;
      in.node_names.push_back(std::string(label) + "-" + std::to_string(i + 1));
    }
  }
  for (const auto& [group, label] : {std::pair{&deployment.large_cells, "large"},
                                     std::pair{&deployment.small_cells, "small"}}) {
    for (std::size_t i = 0; i < group->count; ++i) {
      in.ran_capacity.push_back(group->bandwidth_mhz);
      in.cell_names.push_back(std::string(label) + "-" + std::to_string(i + 1));
    }
  }

  const std::size_t S = assignment.size();
  const std::size_t C = in.ran_capacity.size();
  in.mec_demand = Matrix(S, 2);
  in.ran_demand = Matrix(S, C);
  Stream rng(seed);
  for (std::size_t s = 0; s < S; ++s) {
    const auto& t = assignment[s];
    in.mec_demand(s, 0) = noisy(rng, t.cpu_per_job, deployment);
    in.mec_demand(s, 1) = noisy(rng, t.ram_per_job, deployment);
    const double shared = noisy(rng, t.ran_per_job, deployment);
    for (std::size_t c = 0; c < C; ++c) {
      in.ran_demand(s, c) =
          deployment.per_cell_ran_noise && c > 0 ? noisy(rng, t.ran_per_job, deployment) : shared;
    }
    in.budgets.push_back(t.budget);
    in.provider_names.push_back("S" + std::to_string(s + 1) + ":" + t.name);
  }
  return in;
}

MarketInstance generate_instance(const DeploymentTemplate& deployment, std::uint64_t seed) {
  deployment.validate();
  if (deployment.catalogue.empty()) throw std::invalid_argument("template catalogue is empty");
  // Template choice uses its own stream so the noise draws do not depend
  // on the catalogue size.
  Stream pick(instance_seed(seed, 0x7e3a));
  std::vector<ServiceTemplate> assignment;
  for (std::size_t s = 0; s < deployment.provider_count; ++s) {
    assignment.push_back(deployment.catalogue[pick.index(deployment.catalogue.size())]);
  }
  return generate_instance(deployment, assignment, seed);
}

std::uint64_t instance_seed(std::uint64_t seed, std::size_t index) noexcept {
  // splitmix64 finaliser
  std::uint64_t z = seed + static_cast<std::uint64_t>(index) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::vector<double> default_budget_values() {
  std::vector<double> v;
  for (int i = 0; i <= 8; ++i) v.push_back(1.0 + 0.5 * i);
  return v;
}

std::vector<MarketInstance> sweep_budget(const MarketInstance& base, std::size_t provider,
                                         std::span<const double> values) {
  base.check_dimensions();
  if (provider >= base.providers()) throw InstanceError("provider index out of range");
  std::vector<MarketInstance> out;
  for (double v : values) {
    if (!(v > 0.0)) throw std::invalid_argument("budget values must be positive");
    out.push_back(base);
    out.back().budgets[provider] = v;
  }
  return out;
}

std::vector<MarketInstance> sweep_nodes(const MarketInstance& base,
                                        const std::vector<std::vector<std::size_t>>& schedule) {
  return shrink(base, schedule, base.nodes(), "node", keep_nodes);
}

std::vector<MarketInstance> sweep_cells(const MarketInstance& base,
                                        const std::vector<std::vector<std::size_t>>& schedule) {
  return shrink(base, schedule, base.cells(), "cell", keep_cells);
}

std::vector<std::vector<std::size_t>> paired_node_schedule(const DeploymentTemplate& deployment) {
  const std::size_t cpu = deployment.cpu_nodes.count;
  const std::size_t ram = deployment.ram_nodes.count;
  std::vector<std::vector<std::size_t>> schedule;
  for (std::size_t k = 1; k < std::min(cpu, ram); ++k) {
    schedule.push_back({cpu - k, cpu + ram - k});
  }
  return schedule;
}

std::vector<std::vector<std::size_t>> small_cell_schedule(const DeploymentTemplate& deployment) {
  const std::size_t large = deployment.large_cells.count;
  const std::size_t small = deployment.small_cells.count;
  std::vector<std::vector<std::size_t>> schedule;
  for (std::size_t k = 1; k < small; ++k) schedule.push_back({large + small - k});
  return schedule;
}

}  // namespace edgemarket
