#include "edgemarket/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <ostream>
#include <set>
#include <stdexcept>
#include <thread>

#include "edgemarket/mechanisms.hpp"

namespace edgemarket {

namespace {

void check_mechanisms(const std::vector<Mechanism>& mechanisms) {
  if (mechanisms.empty()) throw std::invalid_argument("at least one mechanism is required");
  std::set<Mechanism> seen(mechanisms.begin(), mechanisms.end());
  if (seen.size() != mechanisms.size()) throw std::invalid_argument("mechanism listed twice");
}

std::string join(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += io::csv_field(fields[i]);
  }
  return line + '\n';
}

std::string optional_number(const std::optional<double>& v) {
  return v ? io::format_number(*v) : std::string();
}

const Certificate* find_certificate(const MetricsReport& report, const std::string& name) {
  for (const auto& c : report.certificates) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::vector<MechanismResult> solve_all(const MarketInstance& instance,
                                       const std::vector<Mechanism>& mechanisms,
                                       const SolverSettings& settings) {
  std::vector<MechanismResult> results;
  for (Mechanism m : mechanisms) results.push_back(run_mechanism(instance, m, settings));
  return results;
}

// Throws FormatError naming the key if `j` is not a non-negative integer.
std::uint64_t read_unsigned(const io::Json& j, const std::string& key) {
  if (!j.is_number_unsigned()) throw io::FormatError(key + " must be a non-negative integer");
  return j.get<std::uint64_t>();
}

void reject_unknown(const io::Json& obj, std::initializer_list<const char*> known,
                    const std::string& where) {
  if (!obj.is_object()) throw io::FormatError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw io::FormatError("unknown key \"" + key + "\" in " + where);
    }
  }
}

DeploymentTemplate deployment_of(const io::Json& config) {
  auto it = config.find("deployment");
  return it == config.end() ? DeploymentTemplate{} : io::deployment_from_json(*it);
}

SolverSettings solver_of(const io::Json& config) {
  auto it = config.find("solver");
  return it == config.end() ? SolverSettings{} : solver_settings_from_json(*it);
}

}  // namespace

void ExperimentPlan::validate() const {
  if (instances == 0) throw std::invalid_argument("an experiment needs at least one instance");
  check_mechanisms(mechanisms);
  deployment.validate();
  if (deployment.provider_count == 0) throw std::invalid_argument("deployment has no providers");
  if (deployment.catalogue.empty()) throw std::invalid_argument("template catalogue is empty");
  solver.validate();
}

bool InstanceRun::converged() const noexcept {
  return error.empty() && std::all_of(results.begin(), results.end(), [](const auto& r) {
           return r.status == SolverStatus::converged;
         });
}

void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& task) {
  if (count == 0) return;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto drain = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    drain();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(drain);
  }
  if (failure) std::rethrow_exception(failure);
}

ExperimentRun run_experiment(const ExperimentPlan& plan) {
  plan.validate();
  ExperimentRun run;
  run.instances.resize(plan.instances);
  parallel_for(plan.instances, plan.workers, [&](std::size_t i) {
    InstanceRun& out = run.instances[i];
    out.index = i;
    out.seed = instance_seed(plan.seed, i);
    out.id = "i" + std::to_string(i);
    try {
      out.instance = generate_instance(plan.deployment, out.seed);
      out.results = solve_all(out.instance, plan.mechanisms, plan.solver);
      MetricsOptions options = plan.metrics;
      options.seed = out.seed;
      options.certificates = plan.certificates;
      out.report = compute_metrics(out.id, out.instance, out.results, options);
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  });

  std::vector<MetricsReport> reports;
  for (const auto& r : run.instances) {
    if (r.error.empty()) reports.push_back(r.report);
  }
  run.summary = summarize(reports);

  auto has = [&](Mechanism m) {
    return std::find(plan.mechanisms.begin(), plan.mechanisms.end(), m) != plan.mechanisms.end();
  };
  if (!has(Mechanism::so)) run.warnings.push_back("no SO in the plan: eta columns are empty");
  if (!has(Mechanism::me) && plan.certificates) {
    run.warnings.push_back("no ME in the plan: certificates were not evaluated");
  }
  for (const auto& r : run.instances) {
    if (!r.error.empty()) {
      run.warnings.push_back(r.id + ": " + r.error);
      continue;
    }
    for (const auto& res : r.results) {
      if (res.status != SolverStatus::converged) {
        run.warnings.push_back(r.id + ": " + std::string(to_string(res.mechanism)) + " " +
                               std::string(to_string(res.status)));
      }
    }
  }
  return run;
}

const std::vector<std::string>& certificate_names() {
  static const std::vector<std::string> names{
      "kkt",         "market_equilibrium",     "sharing_incentive", "welfare_ordering",
      "nsw_maximality", "proportional_fairness", "envy_freeness"};
  return names;
}

std::vector<std::string> metrics_columns(std::size_t providers) {
  std::vector<std::string> cols{"instance_id", "mechanism", "SW", "NSW_log", "eta"};
  for (const auto& n : certificate_names()) cols.push_back("pass_" + n);
  for (const auto& n : certificate_names()) cols.push_back("res_" + n);
  cols.insert(cols.end(), {"status", "iterations", "zero_utility_providers"});
  for (std::size_t s = 0; s < providers; ++s) cols.push_back("u_" + std::to_string(s + 1));
  return cols;
}

void write_metrics_csv(std::ostream& out, const ExperimentRun& run, std::size_t providers) {
  const auto columns = metrics_columns(providers);
  out << join(columns);
  const std::size_t certs = certificate_names().size();
  for (const auto& inst : run.instances) {
    if (!inst.error.empty()) {
      std::vector<std::string> row(columns.size());
      row[0] = inst.id;
      row[5 + 2 * certs] = "error";
      out << join(row);
      continue;
    }
    for (std::size_t k = 0; k < inst.results.size(); ++k) {
      const MechanismResult& res = inst.results[k];
      const MechanismMetrics& m = inst.report.mechanisms[k];
      std::vector<std::string> row{inst.id, std::string(to_string(res.mechanism)),
                                   io::format_number(m.social_welfare),
                                   io::format_number(m.nsw_log), optional_number(m.efficiency)};
      std::vector<std::string> pass(certs), residual(certs);
      if (res.mechanism == Mechanism::me) {
        for (std::size_t c = 0; c < certs; ++c) {
          const Certificate* cert = find_certificate(inst.report, certificate_names()[c]);
          if (!cert) continue;
          if (!cert->applicable) {
            pass[c] = "na";
            continue;
          }
          pass[c] = cert->passed() ? "1" : "0";
          residual[c] = io::format_number(cert->max_residual());
        }
      }
      row.insert(row.end(), pass.begin(), pass.end());
      row.insert(row.end(), residual.begin(), residual.end());
      row.push_back(std::string(to_string(res.status)));
      row.push_back(std::to_string(res.iterations));
      row.push_back(std::to_string(m.zero_utility_providers));
      for (std::size_t s = 0; s < providers; ++s) {
        row.push_back(s < res.utilities.size() ? io::format_number(res.utilities[s]) : "");
      }
      out << join(row);
    }
  }
}

std::vector<std::string> summary_columns() {
  std::vector<std::string> cols{"instances",       "failed_instances", "nonconverged_instances",
                                "mean_eta_me",     "mean_eta_ps",      "min_eta_me",
                                "empirical_poa",   "mean_zero_fraction_so",
                                "instances_failing_certificates"};
  for (const auto& n : certificate_names()) cols.push_back("pass_rate_" + n);
  return cols;
}

void write_summary_csv(std::ostream& out, const ExperimentRun& run) {
  out << join(summary_columns());
  std::size_t failed = 0, nonconverged = 0;
  for (const auto& r : run.instances) {
    if (!r.error.empty()) {
      ++failed;
    } else if (!r.converged()) {
      ++nonconverged;
    }
  }
  const BatchSummary& s = run.summary;
  const bool have_so = std::any_of(run.instances.begin(), run.instances.end(), [](const auto& r) {
    return r.report.find(Mechanism::so) != nullptr;
  });
  std::vector<std::string> row{std::to_string(run.instances.size()),
                               std::to_string(failed),
                               std::to_string(nonconverged),
                               optional_number(s.mean_efficiency_me),
                               optional_number(s.mean_efficiency_ps),
                               optional_number(s.min_efficiency_me),
                               optional_number(s.empirical_poa),
                               have_so ? io::format_number(s.mean_zero_fraction_so) : "",
                               std::to_string(s.failed_certificates)};
  for (const auto& name : certificate_names()) {
    std::size_t evaluated = 0, passed = 0;
    for (const auto& r : run.instances) {
      const Certificate* c = r.error.empty() ? find_certificate(r.report, name) : nullptr;
      if (!c || !c->applicable) continue;
      ++evaluated;
      if (c->passed()) ++passed;
    }
    row.push_back(evaluated ? io::format_number(static_cast<double>(passed) /
                                                static_cast<double>(evaluated))
                            : "");
  }
  out << join(row);
}

std::string_view to_string(SweepKind kind) noexcept {
  switch (kind) {
    case SweepKind::budget: return "budget";
    case SweepKind::nodes: return "nodes";
    case SweepKind::cells: return "cells";
  }
  return "?";
}

void SweepPlan::validate() const {
  deployment.validate();
  if (assignment.empty()) throw std::invalid_argument("a sweep needs at least one provider");
  check_mechanisms(mechanisms);
  solver.validate();
  if (kind == SweepKind::budget) {
    if (provider >= assignment.size()) throw std::invalid_argument("sweep provider out of range");
    if (values.empty()) throw std::invalid_argument("budget sweep needs at least one value");
  }
}

std::vector<MarketInstance> sweep_instances(const SweepPlan& plan) {
  plan.validate();
  const MarketInstance base = generate_instance(plan.deployment, plan.assignment, plan.seed);
  switch (plan.kind) {
    case SweepKind::budget: return sweep_budget(base, plan.provider, plan.values);
    case SweepKind::nodes: return sweep_nodes(base, plan.schedule);
    case SweepKind::cells: return sweep_cells(base, plan.schedule);
  }
  throw std::invalid_argument("unknown sweep kind");
}

std::vector<SweepPoint> run_sweep(const SweepPlan& plan) {
  const auto instances = sweep_instances(plan);
  std::vector<SweepPoint> points(instances.size());
  parallel_for(instances.size(), plan.workers, [&](std::size_t i) {
    SweepPoint& p = points[i];
    p.index = i;
    p.instance = instances[i];
    switch (plan.kind) {
      case SweepKind::budget: p.value = plan.values[i]; break;
      case SweepKind::nodes: p.value = static_cast<double>(p.instance.nodes()); break;
      case SweepKind::cells: p.value = static_cast<double>(p.instance.cells()); break;
    }
    try {
      p.results = solve_all(p.instance, plan.mechanisms, plan.solver);
    } catch (const std::exception& e) {
      p.error = e.what();
    }
  });
  return points;
}

std::vector<std::string> sweep_columns() {
  return {"kind",   "point",    "value",    "nodes",         "cells",  "mechanism",
          "status", "provider", "provider_name", "budget", "utility", "social_welfare"};
}

void write_sweep_csv(std::ostream& out, const SweepPlan& plan, std::span<const SweepPoint> points) {
  out << join(sweep_columns());
  const std::string kind(to_string(plan.kind));
  for (const auto& p : points) {
    const std::vector<std::string> head{kind, std::to_string(p.index), io::format_number(p.value),
                                        std::to_string(p.instance.nodes()),
                                        std::to_string(p.instance.cells())};
    if (!p.error.empty()) {
      auto row = head;
      row.insert(row.end(), {"", "error", "", "", "", "", ""});
      out << join(row);
      continue;
    }
    for (const auto& res : p.results) {
      for (std::size_t s = 0; s < p.instance.providers(); ++s) {
        auto row = head;
        row.push_back(std::string(to_string(res.mechanism)));
        row.push_back(std::string(to_string(res.status)));
        row.push_back(std::to_string(s + 1));
        row.push_back(s < p.instance.provider_names.size() ? p.instance.provider_names[s] : "");
        row.push_back(io::format_number(p.instance.budgets[s]));
        row.push_back(io::format_number(res.utilities[s]));
        row.push_back(io::format_number(res.social_welfare));
        out << join(row);
      }
    }
  }
}

SolverSettings solver_settings_from_json(const io::Json& doc) {
  reject_unknown(doc,
                 {"kkt_tolerance", "utility_floor", "max_iterations", "step_fraction",
                  "initial_point", "seed", "zero_snap"},
                 "solver");
  SolverSettings s;
  auto num = [&](const char* key, double& field) {
    if (auto it = doc.find(key); it != doc.end()) {
      if (!it->is_number()) throw io::FormatError(std::string("solver.") + key + " must be a number");
      field = it->get<double>();
    }
  };
  num("kkt_tolerance", s.kkt_tolerance);
  num("utility_floor", s.utility_floor);
  num("step_fraction", s.step_fraction);
  num("zero_snap", s.zero_snap);
  if (auto it = doc.find("max_iterations"); it != doc.end()) {
    s.max_iterations = read_unsigned(*it, "solver.max_iterations");
  }
  if (auto it = doc.find("seed"); it != doc.end()) s.seed = read_unsigned(*it, "solver.seed");
  if (auto it = doc.find("initial_point"); it != doc.end()) {
    const std::string v = it->is_string() ? it->get<std::string>() : "";
    if (v == "proportional") {
      s.initial_point = InitialPoint::proportional;
    } else if (v == "random") {
      s.initial_point = InitialPoint::random;
    } else {
      throw io::FormatError("solver.initial_point must be \"proportional\" or \"random\"");
    }
  }
  return s;
}

std::vector<Mechanism> mechanisms_from_json(const io::Json& list) {
  if (!list.is_array()) throw io::FormatError("mechanisms must be an array of names");
  std::vector<Mechanism> out;
  for (const auto& item : list) {
    auto m = item.is_string() ? parse_mechanism(item.get<std::string>()) : std::nullopt;
    if (!m) throw io::FormatError("unknown mechanism " + item.dump());
    out.push_back(*m);
  }
  return out;
}

ExperimentPlan experiment_plan_from_json(const io::Json& config) {
  reject_unknown(config, {"units", "deployment", "solver", "experiment", "sweep"}, "config");
  ExperimentPlan plan;
  plan.deployment = deployment_of(config);
  plan.solver = solver_of(config);
  plan.seed = plan.deployment.seed;
  plan.metrics.kkt_tolerance = plan.solver.kkt_tolerance;
  auto it = config.find("experiment");
  if (it == config.end()) return plan;
  const io::Json& e = *it;
  reject_unknown(e,
                 {"instances", "seed", "mechanisms", "certificates", "workers", "fairness_samples",
                  "equilibrium_tolerance", "ordering_tolerance"},
                 "experiment");
  if (auto f = e.find("instances"); f != e.end()) {
    plan.instances = read_unsigned(*f, "experiment.instances");
  }
  if (auto f = e.find("seed"); f != e.end()) plan.seed = read_unsigned(*f, "experiment.seed");
  if (auto f = e.find("mechanisms"); f != e.end()) plan.mechanisms = mechanisms_from_json(*f);
  if (auto f = e.find("certificates"); f != e.end()) {
    if (!f->is_boolean()) throw io::FormatError("experiment.certificates must be true or false");
    plan.certificates = f->get<bool>();
  }
  if (auto f = e.find("workers"); f != e.end()) plan.workers = read_unsigned(*f, "experiment.workers");
  if (auto f = e.find("fairness_samples"); f != e.end()) {
    plan.metrics.fairness_samples = read_unsigned(*f, "experiment.fairness_samples");
  }
  for (auto [key, field] : {std::pair{"equilibrium_tolerance", &plan.metrics.equilibrium_tolerance},
                            std::pair{"ordering_tolerance", &plan.metrics.ordering_tolerance}}) {
    if (auto f = e.find(key); f != e.end()) {
      if (!f->is_number() || !(f->get<double>() > 0.0)) {
        throw io::FormatError(std::string("experiment.") + key + " must be a positive number");
      }
      *field = f->get<double>();
    }
  }
  return plan;
}

SweepPlan sweep_plan_from_json(const io::Json& config) {
  reject_unknown(config, {"units", "deployment", "solver", "experiment", "sweep"}, "config");
  auto it = config.find("sweep");
  if (it == config.end()) throw io::FormatError("config has no \"sweep\" section");
  const io::Json& sw = *it;
  reject_unknown(sw, {"kind", "assignment", "seed", "provider", "values", "schedule", "mechanisms"},
                 "sweep");
  SweepPlan plan;
  plan.deployment = deployment_of(config);
  plan.solver = solver_of(config);
  plan.seed = plan.deployment.seed;

  const std::string kind = sw.value("kind", std::string());
  if (kind == "budget") {
    plan.kind = SweepKind::budget;
  } else if (kind == "nodes") {
    plan.kind = SweepKind::nodes;
  } else if (kind == "cells") {
    plan.kind = SweepKind::cells;
  } else {
    throw io::FormatError("sweep.kind must be \"budget\", \"nodes\" or \"cells\"");
  }

  auto assignment = sw.find("assignment");
  if (assignment == sw.end() || !assignment->is_array()) {
    throw io::FormatError("sweep.assignment must list one template name per provider");
  }
  for (const auto& name : *assignment) {
    if (!name.is_string()) throw io::FormatError("sweep.assignment entries must be template names");
    plan.assignment.push_back(io::find_template(plan.deployment.catalogue, name.get<std::string>()));
  }
  if (auto f = sw.find("seed"); f != sw.end()) plan.seed = read_unsigned(*f, "sweep.seed");
  if (auto f = sw.find("provider"); f != sw.end()) plan.provider = read_unsigned(*f, "sweep.provider");
  if (auto f = sw.find("values"); f != sw.end()) {
    plan.values.clear();
    if (!f->is_array()) throw io::FormatError("sweep.values must be an array of numbers");
    for (const auto& v : *f) {
      if (!v.is_number()) throw io::FormatError("sweep.values must be an array of numbers");
      plan.values.push_back(v.get<double>());
    }
  }
  if (auto f = sw.find("mechanisms"); f != sw.end()) plan.mechanisms = mechanisms_from_json(*f);

  if (auto f = sw.find("schedule"); f != sw.end()) {
    if (f->is_string()) {
      const std::string name = f->get<std::string>();
      if (name == "paired_nodes") {
        plan.schedule = paired_node_schedule(plan.deployment);
      } else if (name == "small_cells") {
        plan.schedule = small_cell_schedule(plan.deployment);
      } else {
        throw io::FormatError("sweep.schedule must be \"paired_nodes\", \"small_cells\" or a list");
      }
    } else if (f->is_array()) {
      for (const auto& step : *f) {
        if (!step.is_array()) throw io::FormatError("every sweep.schedule step must be a list");
        std::vector<std::size_t> indices;
        for (const auto& idx : step) indices.push_back(read_unsigned(idx, "sweep.schedule index"));
        plan.schedule.push_back(std::move(indices));
      }
    } else {
      throw io::FormatError("sweep.schedule must be a name or a list of steps");
    }
  } else if (plan.kind == SweepKind::nodes) {
    plan.schedule = paired_node_schedule(plan.deployment);
  } else if (plan.kind == SweepKind::cells) {
    plan.schedule = small_cell_schedule(plan.deployment);
  }
  return plan;
}

}  // namespace edgemarket
