#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "edgemarket/io.hpp"
#include "fixtures.hpp"

using namespace edgemarket;
namespace cli = edgemarket::cli;
namespace fs = std::filesystem;
namespace t = edgemarket::testing;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("edgemarket_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  Scratch(const Scratch&) = delete;
  Scratch& operator=(const Scratch&) = delete;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Sets the config directory for one scope.
struct ConfigDir {
  explicit ConfigDir(const char* dir) {
    if (dir) {
      ::setenv(cli::config_dir_variable, dir, 1);
    } else {
      ::unsetenv(cli::config_dir_variable);
    }
  }
  ~ConfigDir() { ::unsetenv(cli::config_dir_variable); }
};

}  // namespace

TEST_CASE("generate is deterministic for a seed") {
  Scratch scratch;
  ConfigDir env(EDGEMARKET_SOURCE_CONFIG_DIR);
  std::ostringstream out, err;
  cli::Overrides o;
  o.seed = 5;
  REQUIRE(cli::cmd_generate("", o, scratch.dir / "a.json", out, err) == cli::exit_ok);
  REQUIRE(cli::cmd_generate("experiment", o, scratch.dir / "b.json", out, err) == cli::exit_ok);
  CHECK(slurp(scratch.dir / "a.json") == slurp(scratch.dir / "b.json"));
  const auto in = io::read_instance(scratch.dir / "a.json");
  CHECK(in.providers() == 15);
  CHECK(in.cells() == 7);

  o.seed = 6;
  REQUIRE(cli::cmd_generate("", o, scratch.dir / "c.json", out, err) == cli::exit_ok);
  CHECK(slurp(scratch.dir / "a.json") != slurp(scratch.dir / "c.json"));
}

TEST_CASE("generate with zero noise writes the templates exactly") {
  Scratch scratch;
  ConfigDir env(nullptr);
  io::Json config;
  config["deployment"] = {{"noise_relative", 0.0}, {"providers", 4}};
  io::write_json(scratch.dir / "quiet.json", config);
  std::ostringstream out, err;
  REQUIRE(cli::cmd_generate((scratch.dir / "quiet.json").string(), {}, scratch.dir / "in.json", out,
                            err) == cli::exit_ok);
  const auto in = io::read_instance(scratch.dir / "in.json");
  const auto catalogue = standard_templates();
  for (std::size_t s = 0; s < in.providers(); ++s) {
    bool matches = false;
    for (const auto& tpl : catalogue) {
      matches = matches || (in.mec_demand(s, 0) == tpl.cpu_per_job &&
                            in.mec_demand(s, 1) == tpl.ram_per_job &&
                            in.ran_demand(s, 0) == tpl.ran_per_job && in.budgets[s] == tpl.budget);
    }
    CHECK(matches);
  }
}

TEST_CASE("solve reports each mechanism") {
  Scratch scratch;
  ConfigDir env(nullptr);
  io::write_instance(scratch.dir / "single.json", t::single_node());
  auto pair = t::single_node(2);
  pair.budgets = {1.0, 3.0};
  io::write_instance(scratch.dir / "pair.json", pair);
  io::write_instance(scratch.dir / "ten.json", t::capacity_ten());

  std::ostringstream out, err;
  REQUIRE(cli::cmd_solve(scratch.dir / "single.json", "ME", {}, scratch.dir / "me.json", out, err) ==
          cli::exit_ok);
  const auto me = io::read_json(scratch.dir / "me.json");
  CHECK(me["result"]["utilities"][0].get<double>() == doctest::Approx(8.0).epsilon(1e-8));
  CHECK(me["certificates"].size() == 3);
  for (const auto& c : me["certificates"]) CHECK(c["passed"].get<bool>());
  CHECK(me.contains("bang_per_buck"));
  CHECK(out.str().find("certificates") != std::string::npos);

  REQUIRE(cli::cmd_solve(scratch.dir / "pair.json", "ps", {}, scratch.dir / "ps.json", out, err) ==
          cli::exit_ok);
  const auto ps = io::read_json(scratch.dir / "ps.json");
  CHECK(ps["result"]["utilities"][0].get<double>() == doctest::Approx(2.0));
  CHECK(ps["result"]["utilities"][1].get<double>() == doctest::Approx(6.0));

  REQUIRE(cli::cmd_solve(scratch.dir / "ten.json", "SO", {}, scratch.dir / "so.json", out, err) ==
          cli::exit_ok);
  CHECK(io::read_json(scratch.dir / "so.json")["result"]["social_welfare"].get<double>() ==
        doctest::Approx(10.0).epsilon(1e-7));
}

TEST_CASE("exit codes") {
  Scratch scratch;
  ConfigDir env(nullptr);
  std::ostringstream out, err;

  CHECK(cli::cmd_solve(scratch.dir / "missing.json", "ME", {}, {}, out, err) == cli::exit_io);
  CHECK(cli::cmd_solve(scratch.dir / "missing.json", "DRF", {}, {}, out, err) == cli::exit_usage);

  io::write_text(scratch.dir / "broken.json", "{\"nodes\": 3}");
  CHECK(cli::cmd_solve(scratch.dir / "broken.json", "ME", {}, {}, out, err) == cli::exit_validation);

  auto bad = t::single_node();
  bad.budgets[0] = -1.0;
  io::write_instance(scratch.dir / "negative.json", bad);
  CHECK(cli::cmd_solve(scratch.dir / "negative.json", "ME", {}, {}, out, err) ==
        cli::exit_validation);

  io::write_instance(scratch.dir / "single.json", t::random_instance(5, {4, 3, 3, 3}));
  cli::Overrides tight;
  tight.kkt_tolerance = 0.0;
  CHECK(cli::cmd_solve(scratch.dir / "single.json", "ME", tight, {}, out, err) ==
        cli::exit_validation);

  CHECK(cli::cmd_experiment("", {}, {}, out, err) == cli::exit_usage);
  CHECK(cli::cmd_experiment("nowhere.json", {}, scratch.dir / "exp", out, err) == cli::exit_io);
  CHECK(cli::cmd_sweep("", "", {}, {}, out, err) == cli::exit_usage);
  CHECK(cli::cmd_sweep("", "budget", {}, {}, out, err) == cli::exit_usage);
}

TEST_CASE("config files are found through the environment") {
  {
    ConfigDir env(nullptr);
    CHECK_FALSE(cli::resolve_config("", "experiment.json").has_value());
    CHECK_THROWS_AS((void)cli::resolve_config("experiment", ""), io::IoError);
  }
  ConfigDir env(EDGEMARKET_SOURCE_CONFIG_DIR);
  const fs::path dir(EDGEMARKET_SOURCE_CONFIG_DIR);
  CHECK(cli::resolve_config("", "experiment.json") == dir / "experiment.json");
  CHECK(cli::resolve_config("experiment", "") == dir / "experiment.json");
  CHECK(cli::resolve_config("sweep_budget.json", "") == dir / "sweep_budget.json");
  CHECK_THROWS_AS((void)cli::resolve_config("absent", ""), io::IoError);
}

TEST_CASE("small experiment and sweep through the commands") {
  Scratch scratch;
  ConfigDir env(EDGEMARKET_SOURCE_CONFIG_DIR);
  io::Json config = io::read_json(fs::path(EDGEMARKET_SOURCE_CONFIG_DIR) / "experiment.json");
  config["experiment"]["instances"] = 2;
  io::write_json(scratch.dir / "two.json", config);

  std::ostringstream out, err;
  cli::Overrides o;
  o.workers = 2;
  REQUIRE(cli::cmd_experiment((scratch.dir / "two.json").string(), o, scratch.dir / "exp", out,
                              err) == cli::exit_ok);
  const std::string metrics = slurp(scratch.dir / "exp" / "metrics.csv");
  CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 1 + 2 * 4);
  CHECK(fs::exists(scratch.dir / "exp" / "summary.csv"));

  REQUIRE(cli::cmd_sweep("", "nodes", o, scratch.dir / "nodes.csv", out, err) == cli::exit_ok);
  const std::string sweep = slurp(scratch.dir / "nodes.csv");
  CHECK(sweep.rfind("kind,point,value", 0) == 0);
  CHECK(cli::cmd_sweep("sweep_nodes", "cells", o, {}, out, err) == cli::exit_usage);
}
