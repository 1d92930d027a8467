#include <doctest.h>

#include <cmath>
#include <vector>

#include "edgemarket/scenario.hpp"

using namespace edgemarket;

TEST_CASE("default deployment dimensions") {
  const auto in = generate_instance(DeploymentTemplate{}, 1);
  CHECK(in.providers() == 15);
  CHECK(in.nodes() == 10);
  CHECK(in.cells() == 7);
  CHECK(in.resource_types() == 2);
  CHECK(in.mec_capacity(0, 0) == 32.0);
  CHECK(in.mec_capacity(9, 1) == 256.0);
  CHECK(in.ran_capacity.front() == 40.0);
  CHECK(in.ran_capacity.back() == 20.0);
  CHECK(validate_instance(in).ok());
}

TEST_CASE("zero noise reproduces the templates") {
  DeploymentTemplate d;
  d.noise_relative = 0.0;
  const std::vector<ServiceTemplate> assignment{cpu_intensive(), ram_intensive(), bw_intensive(),
                                                balanced()};
  const auto in = generate_instance(d, assignment, 3);
  for (std::size_t s = 0; s < assignment.size(); ++s) {
    CHECK(in.mec_demand(s, 0) == assignment[s].cpu_per_job);
    CHECK(in.mec_demand(s, 1) == assignment[s].ram_per_job);
    for (std::size_t c = 0; c < in.cells(); ++c) CHECK(in.ran_demand(s, c) == assignment[s].ran_per_job);
    CHECK(in.budgets[s] == assignment[s].budget);
  }
  CHECK(in.provider_names[3] == "S4:Balanced");
}

TEST_CASE("fixed seed gives an identical instance") {
  const DeploymentTemplate d;
  CHECK(generate_instance(d, 77) == generate_instance(d, 77));
  CHECK_FALSE(generate_instance(d, 77) == generate_instance(d, 78));
  CHECK(instance_seed(5, 0) != instance_seed(5, 1));
  CHECK(instance_seed(5, 3) == instance_seed(5, 3));
}

TEST_CASE("noise has relative standard deviation 0.25") {
  DeploymentTemplate d;
  d.large_cells = {1, 40.0};
  d.small_cells = {0, 20.0};
  const std::vector<ServiceTemplate> assignment(10000, cpu_intensive());
  const auto in = generate_instance(d, assignment, 12345);
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (std::size_t s = 0; s < in.providers(); ++s) {
    const double rel = in.mec_demand(s, 0) / 4.0 - 1.0;
    if (in.mec_demand(s, 0) <= 0.05 * 4.0) continue;  // truncated
    sum += rel;
    sq += rel * rel;
    ++n;
  }
  const double mean = sum / static_cast<double>(n);
  const double sd = std::sqrt(sq / static_cast<double>(n) - mean * mean);
  CHECK(std::abs(sd - 0.25) <= 0.02);
  CHECK(std::abs(mean) <= 0.02);
}

TEST_CASE("RAN noise per cell or shared") {
  DeploymentTemplate d;
  const std::vector<ServiceTemplate> assignment{bw_intensive()};
  const auto per_cell = generate_instance(d, assignment, 9);
  CHECK(per_cell.ran_demand(0, 0) != per_cell.ran_demand(0, 1));
  d.per_cell_ran_noise = false;
  const auto shared = generate_instance(d, assignment, 9);
  for (std::size_t c = 1; c < shared.cells(); ++c) {
    CHECK(shared.ran_demand(0, c) == shared.ran_demand(0, 0));
  }
}

TEST_CASE("generated instances are always valid") {
  DeploymentTemplate d;
  d.noise_relative = 2.0;  // many draws hit the floor
  for (std::uint64_t seed = 0; seed < 20; ++seed) CHECK(validate_instance(generate_instance(d, seed)).ok());
}

TEST_CASE("deployment validation") {
  DeploymentTemplate d;
  d.large_cells.count = 0;
  d.small_cells.count = 0;
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
  d = {};
  d.noise_floor = 0.0;
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
  d = {};
  d.catalogue.push_back({"broken", 0.0, 1.0, 1.0, 1.0});
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
}

TEST_CASE("budget sweep") {
  const auto base = generate_instance(DeploymentTemplate{}, 1);
  const std::vector<double> one{1.0};
  auto single = sweep_budget(base, 0, one);
  REQUIRE(single.size() == 1);
  auto expected = base;
  expected.budgets[0] = 1.0;
  CHECK(single[0] == expected);

  const auto values = default_budget_values();
  CHECK(values.size() == 9);
  CHECK(values.front() == 1.0);
  CHECK(values.back() == 5.0);
  const auto sweep = sweep_budget(base, 2, values);
  CHECK(sweep.size() == 9);
  CHECK(sweep[4].budgets[2] == 3.0);

  const std::vector<double> bad{0.0};
  CHECK_THROWS_AS((void)sweep_budget(base, 0, bad), std::invalid_argument);
  CHECK_THROWS_AS((void)sweep_budget(base, 99, one), InstanceError);
}

TEST_CASE("node and cell sweeps") {
  DeploymentTemplate d;
  d.large_cells = {5, 40.0};
  d.small_cells = {5, 20.0};
  const std::vector<ServiceTemplate> assignment{balanced(), bw_intensive()};
  const auto base = generate_instance(d, assignment, 1);

  const auto nodes = sweep_nodes(base, paired_node_schedule(d));
  std::vector<std::size_t> counts;
  for (const auto& in : nodes) counts.push_back(in.nodes());
  CHECK(counts == std::vector<std::size_t>{10, 8, 6, 4, 2});
  // One CPU node and one RAM node remain.
  CHECK(nodes.back().node_names == std::vector<std::string>{"cpu-1", "ram-1"});

  const auto cells = sweep_cells(base, small_cell_schedule(d));
  counts.clear();
  for (const auto& in : cells) counts.push_back(in.cells());
  CHECK(counts == std::vector<std::size_t>{10, 9, 8, 7, 6});
  CHECK(cells.back().ran_demand.cols() == 6);
  for (const auto& in : cells) CHECK(validate_instance(in).ok());

  const auto unchanged = sweep_nodes(base, {});
  REQUIRE(unchanged.size() == 1);
  CHECK(unchanged[0] == base);

  CHECK_THROWS_AS((void)sweep_nodes(base, {{10}}), std::invalid_argument);
  CHECK_THROWS_AS((void)sweep_nodes(base, {{1}, {1}}), std::invalid_argument);
  CHECK_THROWS_AS((void)sweep_cells(base, {{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}}), std::invalid_argument);
}
