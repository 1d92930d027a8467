#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include "edgemarket/experiment.hpp"

using namespace edgemarket;

namespace {

std::string golden(const std::string& name) {
  std::ifstream in(std::string(EDGEMARKET_GOLDEN_DIR) + "/" + name);
  REQUIRE(in);
  std::string line;
  std::getline(in, line);
  return line;
}

std::string joined(const std::vector<std::string>& columns) {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  return out;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

ExperimentPlan small_plan(std::size_t instances) {
  ExperimentPlan plan;
  plan.deployment.provider_count = 5;
  plan.instances = instances;
  plan.seed = 17;
  plan.metrics.fairness_samples = 16;
  return plan;
}

}  // namespace

TEST_CASE("CSV column order is pinned by golden files") {
  CHECK(joined(metrics_columns(15)) == golden("metrics_header.csv"));
  CHECK(joined(summary_columns()) == golden("summary_header.csv"));
  CHECK(joined(sweep_columns()) == golden("sweep_header.csv"));

  std::ostringstream out;
  write_sweep_csv(out, SweepPlan{}, {});
  CHECK(first_line(out.str()) == golden("sweep_header.csv"));
}

TEST_CASE("one instance gives one row per mechanism") {
  const auto run = run_experiment(small_plan(1));
  REQUIRE(run.instances.size() == 1);
  CHECK(run.instances[0].converged());
  CHECK(run.instances[0].id == "i0");
  CHECK(run.warnings.empty());

  std::ostringstream metrics, summary;
  write_metrics_csv(metrics, run, 5);
  write_summary_csv(summary, run);
  CHECK(line_count(metrics.str()) == 1 + 4);
  CHECK(first_line(metrics.str()) == joined(metrics_columns(5)));
  CHECK(line_count(summary.str()) == 2);
  CHECK(run.summary.instances == 1);
}

TEST_CASE("a plan without SO leaves eta empty and warns") {
  auto plan = small_plan(2);
  plan.mechanisms = {Mechanism::ps};
  const auto run = run_experiment(plan);
  REQUIRE_FALSE(run.warnings.empty());
  CHECK(run.warnings[0].find("eta") != std::string::npos);

  std::ostringstream metrics;
  write_metrics_csv(metrics, run, 5);
  std::istringstream lines(metrics.str());
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    // instance_id, mechanism, SW, NSW_log, then an empty eta field.
    std::size_t pos = 0;
    for (int i = 0; i < 4; ++i) pos = line.find(',', pos) + 1;
    CHECK(line[pos] == ',');
  }
  CHECK_FALSE(run.summary.mean_efficiency_me.has_value());
}

TEST_CASE("CSV output does not depend on the worker count") {
  auto plan = small_plan(6);
  std::string reference;
  for (std::size_t workers : {1u, 3u, 0u}) {
    plan.workers = workers;
    const auto run = run_experiment(plan);
    std::ostringstream out;
    write_metrics_csv(out, run, 5);
    write_summary_csv(out, run);
    if (reference.empty()) {
      reference = out.str();
    } else {
      CHECK(out.str() == reference);
    }
  }
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, 2,
                               [](std::size_t i) {
                                 if (i == 7) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}

TEST_CASE("plan validation") {
  auto plan = small_plan(0);
  CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
  plan = small_plan(1);
  plan.mechanisms = {Mechanism::me, Mechanism::me};
  CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
  plan.mechanisms.clear();
  CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
}

TEST_CASE("sweeps") {
  SweepPlan plan;
  plan.deployment.noise_relative = 0.0;
  plan.assignment = {cpu_intensive(), cpu_intensive(), balanced()};
  plan.workers = 2;
  const auto budget = run_sweep(plan);
  CHECK(budget.size() == 9);
  CHECK(budget.back().value == 5.0);
  // Identical templates with equal budgets get equal utilities.
  CHECK(budget[0].results[0].utilities[0] ==
        doctest::Approx(budget[0].results[0].utilities[1]).epsilon(1e-6));

  std::ostringstream out;
  write_sweep_csv(out, plan, budget);
  CHECK(line_count(out.str()) == 1 + 9 * 3);

  plan.kind = SweepKind::nodes;
  plan.schedule = paired_node_schedule(plan.deployment);
  std::vector<double> counts;
  for (const auto& p : run_sweep(plan)) counts.push_back(p.value);
  CHECK(counts == std::vector<double>{10, 8, 6, 4, 2});

  plan.schedule.clear();
  CHECK(run_sweep(plan).size() == 1);

  plan.kind = SweepKind::budget;
  plan.provider = 3;
  CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
}

TEST_CASE("config parsing") {
  const auto config = io::Json::parse(R"({
    "deployment": {"providers": 4, "seed": 11},
    "solver": {"kkt_tolerance": 1e-7, "initial_point": "random"},
    "experiment": {"instances": 3, "mechanisms": ["me", "PS"], "workers": 2}
  })");
  const auto plan = experiment_plan_from_json(config);
  CHECK(plan.instances == 3);
  CHECK(plan.seed == 11);
  CHECK(plan.workers == 2);
  CHECK(plan.mechanisms == std::vector<Mechanism>{Mechanism::me, Mechanism::ps});
  CHECK(plan.solver.kkt_tolerance == 1e-7);
  CHECK(plan.solver.initial_point == InitialPoint::random);

  CHECK_THROWS_AS((void)experiment_plan_from_json(io::Json::parse(R"({"experimnt": {}})")),
                  io::FormatError);
  CHECK_THROWS_AS(
      (void)experiment_plan_from_json(io::Json::parse(R"({"experiment": {"mechanisms": ["DRF"]}})")),
      io::FormatError);
  CHECK_THROWS_AS((void)solver_settings_from_json(io::Json::parse(R"({"max_iterations": -3})")),
                  io::FormatError);

  const auto sweep = sweep_plan_from_json(io::Json::parse(R"({
    "deployment": {"large_cells": {"count": 5}, "small_cells": {"count": 5}, "noise_relative": 0},
    "sweep": {"kind": "cells", "assignment": ["balanced", "bw-intensive"]}
  })"));
  CHECK(sweep.kind == SweepKind::cells);
  CHECK(sweep.assignment[1] == bw_intensive());
  CHECK(sweep.schedule.size() == 4);
  CHECK_THROWS_AS((void)sweep_plan_from_json(io::Json::parse(R"({"sweep": {"kind": "x"}})")),
                  io::FormatError);
  CHECK_THROWS_AS((void)sweep_plan_from_json(io::Json::parse(R"({})")), io::FormatError);
}
