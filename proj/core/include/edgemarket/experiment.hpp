#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "edgemarket/analysis.hpp"
#include "edgemarket/eg_solver.hpp"
#include "edgemarket/io.hpp"
#include "edgemarket/result.hpp"
#include "edgemarket/scenario.hpp"

namespace edgemarket {

/// A batch of generated instances, each solved under every listed
/// mechanism. Instance i uses instance_seed(seed, i).
struct ExperimentPlan {
  DeploymentTemplate deployment;
  std::size_t instances = 100;
  std::vector<Mechanism> mechanisms{Mechanism::me, Mechanism::so, Mechanism::wso, Mechanism::ps};
  std::uint64_t seed = 0;
  bool certificates = true;
  std::size_t workers = 0;  ///< 0 uses every hardware thread
  SolverSettings solver;
  MetricsOptions metrics;

  /// Throws std::invalid_argument on an empty or duplicated mechanism
  /// list, zero instances or an invalid deployment.
  void validate() const;
};

struct InstanceRun {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::string id;
  MarketInstance instance;
  std::vector<MechanismResult> results;  ///< in plan order
  MetricsReport report;
  std::string error;  ///< non-empty when the instance could not be processed

  [[nodiscard]] bool converged() const noexcept;
};

struct ExperimentRun {
  std::vector<InstanceRun> instances;  ///< by index
  BatchSummary summary;
  std::vector<std::string> warnings;
};

/// Runs task(0..count-1) on up to `workers` threads (0 = hardware
/// threads). The first exception thrown by a task is rethrown after all
/// threads have finished.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& task);

/// Failures of single instances are recorded in InstanceRun::error and
/// do not stop the batch.
[[nodiscard]] ExperimentRun run_experiment(const ExperimentPlan& plan);

/// Certificate names in CSV column order.
[[nodiscard]] const std::vector<std::string>& certificate_names();

/// instance_id, mechanism, SW, NSW_log, eta, pass_<certificate>...,
/// res_<certificate>..., status, iterations, zero_utility_providers,
/// u_1..u_providers.
[[nodiscard]] std::vector<std::string> metrics_columns(std::size_t providers);

/// One row per instance and mechanism. Certificate columns are filled on
/// the ME row only: 1 / 0, "na" when not applicable, empty when not run.
/// A failed instance gets a single row with status "error".
void write_metrics_csv(std::ostream& out, const ExperimentRun& run, std::size_t providers);

[[nodiscard]] std::vector<std::string> summary_columns();
/// A single data row of batch means, minima and certificate pass rates.
void write_summary_csv(std::ostream& out, const ExperimentRun& run);

enum class SweepKind { budget, nodes, cells };
[[nodiscard]] std::string_view to_string(SweepKind kind) noexcept;

/// A base instance built from explicit templates (noise and seed taken from
/// the deployment) and varied along one axis.
struct SweepPlan {
  SweepKind kind = SweepKind::budget;
  DeploymentTemplate deployment;
  std::vector<ServiceTemplate> assignment;
  std::uint64_t seed = 0;
  std::size_t provider = 0;  ///< budget sweep: whose budget changes
  std::vector<double> values = default_budget_values();
  /// Node or cell sweep: indices removed per step, cumulative.
  std::vector<std::vector<std::size_t>> schedule;
  std::vector<Mechanism> mechanisms{Mechanism::me};
  std::size_t workers = 0;
  SolverSettings solver;

  void validate() const;
};

struct SweepPoint {
  std::size_t index = 0;
  double value = 0.0;  ///< budget, node count or cell count
  MarketInstance instance;
  std::vector<MechanismResult> results;
  std::string error;
};

[[nodiscard]] std::vector<MarketInstance> sweep_instances(const SweepPlan& plan);
[[nodiscard]] std::vector<SweepPoint> run_sweep(const SweepPlan& plan);

[[nodiscard]] std::vector<std::string> sweep_columns();
/// One row per sweep point, mechanism and provider.
void write_sweep_csv(std::ostream& out, const SweepPlan& plan, std::span<const SweepPoint> points);

// Config documents: {"deployment": {...}, "experiment": {...},
// "sweep": {...}, "solver": {...}}. See the README for every key.
[[nodiscard]] SolverSettings solver_settings_from_json(const io::Json& doc);
[[nodiscard]] ExperimentPlan experiment_plan_from_json(const io::Json& config);
[[nodiscard]] SweepPlan sweep_plan_from_json(const io::Json& config);
/// Parses "ME", "so", ... or throws io::FormatError.
[[nodiscard]] std::vector<Mechanism> mechanisms_from_json(const io::Json& list);

}  // namespace edgemarket
