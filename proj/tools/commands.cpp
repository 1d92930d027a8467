#include "commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <ostream>
#include <sstream>

#include "edgemarket/analysis.hpp"
#include "edgemarket/experiment.hpp"
#include "edgemarket/io.hpp"
#include "edgemarket/mechanisms.hpp"
#include "edgemarket/scenario.hpp"

namespace edgemarket::cli {

namespace fs = std::filesystem;

namespace {

// Runs `body`, turning the library's exceptions into exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const io::IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return exit_io;
  } catch (const io::FormatError& e) {
    err << "invalid input: " << e.what() << '\n';
    return exit_validation;
  } catch (const InstanceError& e) {
    err << "invalid instance: " << e.what() << '\n';
    return exit_validation;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return exit_validation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_convergence;
  }
}

io::Json load_config(const std::string& name, const std::string& fallback) {
  const auto path = resolve_config(name, fallback);
  return path ? io::read_json(*path) : io::Json::object();
}

std::vector<Mechanism> parse_mechanisms(const std::vector<std::string>& names) {
  std::vector<Mechanism> out;
  for (const auto& n : names) {
    auto m = parse_mechanism(n);
    if (!m) throw UsageError("unknown mechanism \"" + n + "\" (use ME, SO, WSO or PS)");
    out.push_back(*m);
  }
  return out;
}

void apply(const Overrides& o, SolverSettings& solver) {
  if (o.kkt_tolerance) solver.kkt_tolerance = *o.kkt_tolerance;
}

void print_certificate(std::ostream& out, const Certificate& c) {
  out << "  " << c.name << ": ";
  if (!c.applicable) {
    out << "not applicable";
    if (!c.note.empty()) out << " (" << c.note << ')';
    out << '\n';
    return;
  }
  out << (c.passed() ? "pass" : "FAIL") << "  max residual " << io::format_number(c.max_residual())
      << '\n';
  for (const auto& k : c.checks) {
    out << "    " << k.name << ' ' << io::format_number(k.residual) << " (tol "
        << io::format_number(k.tolerance) << ")" << (k.passed ? "" : "  FAIL") << '\n';
  }
}

std::string format_list(const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ' ';
    s += io::format_number(values[i]);
  }
  return s;
}

std::string format_optional(const std::optional<double>& v) {
  return v ? io::format_number(*v) : "n/a";
}

}  // namespace

std::optional<fs::path> resolve_config(const std::string& name, const std::string& fallback) {
  const char* dir = std::getenv(config_dir_variable);
  if (name.empty()) {
    if (!dir || fallback.empty()) return std::nullopt;
    const fs::path p = fs::path(dir) / fallback;
    if (!fs::exists(p)) return std::nullopt;
    return p;
  }
  const fs::path given(name);
  if (fs::exists(given)) return given;
  if (dir && given.is_relative()) {
    fs::path p = fs::path(dir) / given;
    if (fs::exists(p)) return p;
    if (!p.has_extension()) {
      p += ".json";
      if (fs::exists(p)) return p;
    }
  }
  throw io::IoError("config \"" + name + "\" not found" +
                    (dir ? std::string(" (also searched ") + dir + ")" : std::string()));
}

int cmd_generate(const std::string& config, const Overrides& overrides, const fs::path& out_file,
                 std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const io::Json doc = load_config(config, "experiment.json");
    auto it = doc.find("deployment");
    DeploymentTemplate deployment =
        it == doc.end() ? DeploymentTemplate{} : io::deployment_from_json(*it);
    if (overrides.seed) deployment.seed = *overrides.seed;
    const MarketInstance instance = generate_instance(deployment, deployment.seed);
    const auto report = validate_instance(instance);
    if (!report.ok()) {
      err << "generated instance is invalid:\n" << report.summary() << '\n';
      return static_cast<int>(exit_validation);
    }
    if (out_file.empty()) {
      out << io::to_json(instance).dump(2) << '\n';
    } else {
      io::write_instance(out_file, instance);
      out << "wrote " << out_file.string() << ": " << instance.providers() << " providers, "
          << instance.nodes() << " nodes, " << instance.cells() << " cells (seed "
          << deployment.seed << ")\n";
    }
    return static_cast<int>(exit_ok);
  });
}

int cmd_solve(const fs::path& instance_file, const std::string& mechanism,
              const Overrides& overrides, const fs::path& out_file, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    const auto mech = parse_mechanism(mechanism);
    if (!mech) throw UsageError("unknown mechanism \"" + mechanism + "\" (use ME, SO, WSO or PS)");
    const MarketInstance instance = io::read_instance(instance_file);
    const auto report = validate_instance(instance);
    if (!report.ok()) {
      err << "invalid instance " << instance_file.string() << ":\n" << report.summary() << '\n';
      return static_cast<int>(exit_validation);
    }
    SolverSettings settings;
    apply(overrides, settings);
    settings.validate();
    const bool certificates = overrides.certificates.value_or(true);

    io::Json doc;
    doc["instance"] = instance_file.string();
    MechanismResult result;
    std::vector<Certificate> certs;
    if (*mech == Mechanism::me) {
      const EquilibriumRun run = run_market_equilibrium(instance, settings);
      result = run.result;
      doc["solution"] = io::to_json(run.solution);
      if (certificates) {
        const KktResiduals kkt = kkt_residuals(instance, run.solution);
        Certificate kkt_cert;
        kkt_cert.name = "kkt";
        kkt_cert.checks.push_back(
            {"max_abs", kkt.max_abs, settings.kkt_tolerance, kkt.max_abs < settings.kkt_tolerance});
        certs.push_back(kkt_cert);
        certs.push_back(check_market_equilibrium(instance, run.solution));
        certs.push_back(check_envy_freeness(instance, run.result.allocation));
        doc["kkt"] = io::to_json(kkt);
        doc["bang_per_buck"] =
            io::to_json(bang_per_buck(instance, run.solution.prices(), run.result.utilities));
      }
    } else {
      result = run_mechanism(instance, *mech, settings);
    }
    doc["result"] = io::to_json(result);
    io::Json cert_json = io::Json::array();
    for (const auto& c : certs) cert_json.push_back(io::to_json(c));
    doc["certificates"] = cert_json;

    out << "mechanism " << to_string(result.mechanism) << "  status " << to_string(result.status)
        << "  iterations " << result.iterations << '\n';
    out << "social welfare " << io::format_number(result.social_welfare) << "  log NSW "
        << io::format_number(log_nash_social_welfare(result.utilities, instance.budgets)) << '\n';
    out << "utilities " << format_list(result.utilities) << '\n';
    if (result.prices) {
      out << "ran prices " << format_list(result.prices->ran) << '\n';
      out << "mec prices " << format_list(result.prices->mec.values()) << '\n';
    }
    if (!certs.empty()) out << "certificates\n";
    for (const auto& c : certs) print_certificate(out, c);

    if (!out_file.empty()) io::write_json(out_file, doc);
    if (result.status != SolverStatus::converged) {
      err << "solver did not converge: " << to_string(result.status) << '\n';
      return static_cast<int>(exit_convergence);
    }
    return static_cast<int>(exit_ok);
  });
}

int cmd_experiment(const std::string& config, const Overrides& overrides, const fs::path& out_dir,
                   std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (out_dir.empty()) throw UsageError("experiment needs --out DIR");
    ExperimentPlan plan = experiment_plan_from_json(load_config(config, "experiment.json"));
    if (overrides.seed) plan.seed = *overrides.seed;
    if (!overrides.mechanisms.empty()) plan.mechanisms = parse_mechanisms(overrides.mechanisms);
    if (overrides.workers) plan.workers = *overrides.workers;
    if (overrides.certificates) plan.certificates = *overrides.certificates;
    if (overrides.kkt_tolerance) {
      plan.solver.kkt_tolerance = *overrides.kkt_tolerance;
      plan.metrics.kkt_tolerance = *overrides.kkt_tolerance;
    }

    const ExperimentRun run = run_experiment(plan);
    for (const auto& w : run.warnings) err << "warning: " << w << '\n';

    std::ostringstream metrics, summary;
    write_metrics_csv(metrics, run, plan.deployment.provider_count);
    write_summary_csv(summary, run);
    io::write_text(out_dir / "metrics.csv", metrics.str());
    io::write_text(out_dir / "summary.csv", summary.str());

    const BatchSummary& s = run.summary;
    out << "instances " << plan.instances << "  seed " << plan.seed << '\n';
    out << "mean eta ME " << format_optional(s.mean_efficiency_me) << "  mean eta PS "
        << format_optional(s.mean_efficiency_ps) << "  min eta ME "
        << format_optional(s.min_efficiency_me) << "  empirical PoA "
        << format_optional(s.empirical_poa) << '\n';
    out << "mean share of providers with zero utility under SO "
        << io::format_number(s.mean_zero_fraction_so) << '\n';
    out << "instances failing a certificate " << s.failed_certificates << '\n';
    out << "wrote " << (out_dir / "metrics.csv").string() << " and "
        << (out_dir / "summary.csv").string() << '\n';

    const bool all_converged = std::all_of(run.instances.begin(), run.instances.end(),
                                           [](const auto& r) { return r.converged(); });
    return static_cast<int>(all_converged ? exit_ok : exit_convergence);
  });
}

int cmd_sweep(const std::string& config, const std::string& kind, const Overrides& overrides,
              const fs::path& out_file, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (config.empty() && kind.empty()) throw UsageError("sweep needs --config or --kind");
    const auto path = resolve_config(config, kind.empty() ? "" : "sweep_" + kind + ".json");
    if (!path) throw UsageError("no config for the " + kind + " sweep; pass --config");
    SweepPlan plan = sweep_plan_from_json(io::read_json(*path));
    if (!kind.empty() && kind != to_string(plan.kind)) {
      throw UsageError("--kind " + kind + " contradicts the config's \"" +
                       std::string(to_string(plan.kind)) + "\" sweep");
    }
    if (overrides.seed) plan.seed = *overrides.seed;
    if (!overrides.mechanisms.empty()) plan.mechanisms = parse_mechanisms(overrides.mechanisms);
    if (overrides.workers) plan.workers = *overrides.workers;
    apply(overrides, plan.solver);

    const auto points = run_sweep(plan);
    std::ostringstream csv;
    write_sweep_csv(csv, plan, points);
    if (out_file.empty()) {
      out << csv.str();
    } else {
      io::write_text(out_file, csv.str());
      out << "wrote " << out_file.string() << ": " << points.size() << " " << to_string(plan.kind)
          << " sweep points\n";
    }
    bool converged = true;
    for (const auto& p : points) {
      if (!p.error.empty()) {
        err << "warning: point " << p.index << ": " << p.error << '\n';
        converged = false;
      }
      for (const auto& r : p.results) {
        if (r.status != SolverStatus::converged) {
          err << "warning: point " << p.index << ' ' << to_string(r.mechanism) << ' '
              << to_string(r.status) << '\n';
          converged = false;
        }
      }
    }
    return static_cast<int>(converged ? exit_ok : exit_convergence);
  });
}

}  // namespace edgemarket::cli
