#include <doctest.h>

#include <cmath>

#include "edgemarket/mechanisms.hpp"
#include "edgemarket/oracle.hpp"
#include "fixtures.hpp"

using namespace edgemarket;
namespace t = edgemarket::testing;

TEST_CASE("oracle on the capacity-ten instance") {
  const auto result = brute_force_nsw_oracle(t::capacity_ten(), 0.01);
  CHECK(std::abs(result.utilities[0] - 5.0) <= 0.02);
  CHECK(std::abs(result.utilities[1] - 2.5) <= 0.02);
  CHECK(result.error_bound > 0.0);
  CHECK(result.grid_points > 0);
}

TEST_CASE("oracle with a single provider is the standalone bound") {
  const auto in = t::single_node();
  const auto result = brute_force_nsw_oracle(in, 0.05);
  CHECK(result.utilities[0] == doctest::Approx(standalone_utility(in, 0)).epsilon(1e-9));
}

TEST_CASE("oracle is symmetric for identical providers") {
  const auto result = brute_force_nsw_oracle(t::single_node(2), 0.01);
  const double step = 0.01 * 8.0;
  CHECK(std::abs(result.utilities[0] - result.utilities[1]) <= step + 1e-9);
}

TEST_CASE("oracle agrees with the solver on random small instances") {
  for (std::uint64_t seed = 100; seed < 106; ++seed) {
    const auto in = t::random_instance(seed);
    const auto oracle = brute_force_nsw_oracle(in, 0.02);
    const auto eq = solve_eg(in);
    for (std::size_t s = 0; s < in.providers(); ++s) {
      CHECK(std::abs(oracle.utilities[s] - eq.utilities[s]) <= 2.0 * oracle.error_bound);
    }
  }
}

TEST_CASE("size limits") {
  CHECK_THROWS_AS((void)brute_force_nsw_oracle(t::single_node(4), 0.1), OracleSizeError);
  auto three_nodes = t::single_node(2);
  three_nodes.mec_capacity = Matrix(3, 2, 16.0);
  CHECK_THROWS_AS((void)check_pareto(three_nodes, {1.0, 1.0}, 0.01), OracleSizeError);
  OracleLimits tight;
  tight.grid_points = 10;
  CHECK_THROWS_AS((void)brute_force_nsw_oracle(t::single_node(3), 0.01, tight), OracleSizeError);
  CHECK_THROWS_AS((void)brute_force_nsw_oracle(t::capacity_ten(), 0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)brute_force_nsw_oracle(t::capacity_ten(), 1.5), std::invalid_argument);
}

TEST_CASE("max utility given the others") {
  const auto in = t::capacity_ten();
  CHECK(max_utility_given_others(in, {4.0, 0.0}, 1) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(max_utility_given_others(in, {0.0, 1.0}, 0) == doctest::Approx(8.0).epsilon(1e-9));
  CHECK(max_utility_given_others(in, {11.0, 0.0}, 1) < 0.0);
}

TEST_CASE("Pareto certificate") {
  for (std::uint64_t seed = 200; seed < 204; ++seed) {
    const auto in = t::random_instance(seed);
    const auto me = run_mechanism(in, Mechanism::me);
    CHECK(check_pareto(in, me.utilities, 0.01).passed());
    const auto so = run_mechanism(in, Mechanism::so);
    CHECK(check_pareto(in, so.utilities, 0.01).passed());

    if (in.providers() < 2) continue;
    UtilityVector halved = me.utilities;
    halved[0] *= 0.5;
    CHECK_FALSE(check_pareto(in, halved, 0.01).passed());
  }
}
