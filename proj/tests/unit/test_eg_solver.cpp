#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "edgemarket/analysis.hpp"
#include "edgemarket/eg_solver.hpp"
#include "fixtures.hpp"

using namespace edgemarket;
namespace t = edgemarket::testing;

namespace {

// Maximiser of log x + log((10 - x) / 2) on (0, 10) by ternary search.
double capacity_ten_split() {
  auto f = [](double x) { return std::log(x) + std::log((10.0 - x) / 2.0); };
  double lo = 1e-9, hi = 10.0 - 1e-9;
  for (int i = 0; i < 200; ++i) {
    const double a = lo + (hi - lo) / 3.0, b = hi - (hi - lo) / 3.0;
    if (f(a) < f(b)) {
      lo = a;
    } else {
      hi = b;
    }
  }
  return 0.5 * (lo + hi);
}

// max w.u over {u >= 0 : u1 + 2 u2 <= 10} by its three vertices.
double capacity_ten_linear(double w1, double w2) {
  return std::max({0.0, 10.0 * w1, 5.0 * w2});
}

}  // namespace

TEST_CASE("single buyer saturates its dominant resource") {
  const auto in = t::single_node();
  const auto sol = solve_eg(in);
  REQUIRE(sol.solver_status == SolverStatus::converged);
  CHECK(sol.utilities[0] == doctest::Approx(8.0).epsilon(1e-8));
  CHECK(sol.mec_prices(0, 0) == doctest::Approx(1.0 / 32.0).epsilon(1e-6));
  CHECK(std::abs(sol.mec_prices(0, 1)) < 1e-8);
  CHECK(std::abs(sol.ran_prices[0]) < 1e-8);
}

TEST_CASE("identical providers split evenly") {
  const auto sol = solve_eg(t::single_node(2));
  REQUIRE(sol.solver_status == SolverStatus::converged);
  CHECK(sol.utilities[0] == doctest::Approx(4.0).epsilon(1e-8));
  CHECK(sol.utilities[1] == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("capacity-ten instance matches a direct maximisation") {
  const double x1 = capacity_ten_split();
  CHECK(x1 == doctest::Approx(5.0).epsilon(1e-6));
  const auto sol = solve_eg(t::capacity_ten());
  REQUIRE(sol.solver_status == SolverStatus::converged);
  CHECK(sol.utilities[0] == doctest::Approx(x1).epsilon(1e-7));
  CHECK(sol.utilities[1] == doctest::Approx((10.0 - x1) / 2.0).epsilon(1e-7));
  CHECK(sol.allocation.mec(0, 0, 0) == doctest::Approx(5.0).epsilon(1e-7));
  CHECK(sol.allocation.mec(1, 0, 0) == doctest::Approx(5.0).epsilon(1e-7));
  // Both budgets are spent on the one priced good: p = 2 / 10.
  CHECK(sol.mec_prices(0, 0) == doctest::Approx(0.2).epsilon(1e-6));
}

TEST_CASE("linear objectives") {
  const auto in = t::capacity_ten();
  const std::vector<double> equal{1.0, 1.0};
  const auto so = solve_linear(in, equal);
  REQUIRE(so.status == SolverStatus::converged);
  CHECK(so.objective_value == doctest::Approx(capacity_ten_linear(1, 1)).epsilon(1e-7));
  CHECK(so.social_welfare == doctest::Approx(10.0).epsilon(1e-7));
  CHECK(so.utilities[1] == doctest::Approx(0.0));

  const std::vector<double> skewed{1.0, 10.0};
  const auto wso = solve_linear(in, skewed);
  CHECK(wso.objective_value == doctest::Approx(capacity_ten_linear(1, 10)).epsilon(1e-7));
  CHECK(wso.utilities[1] == doctest::Approx(5.0).epsilon(1e-7));

  const auto one = t::single_node();
  const std::vector<double> unit{1.0};
  CHECK(solve_linear(one, unit).social_welfare ==
        doctest::Approx(solve_eg(one).utilities[0]).epsilon(1e-7));

  CHECK_THROWS_AS((void)solve_linear(in, unit), InstanceError);
  const std::vector<double> negative{1.0, -1.0};
  CHECK_THROWS_AS((void)solve_linear(in, negative), std::invalid_argument);
}

TEST_CASE("program invariants on random instances") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto in = t::random_instance(seed, {4, 3, 3, 3});
    const auto sol = solve_eg(in);
    REQUIRE(sol.solver_status == SolverStatus::converged);
    const double tol = 1e-7;
    CHECK(feasibility_gap(in, sol.allocation).max() < tol);
    for (std::size_t s = 0; s < in.providers(); ++s) {
      double jobs = 0.0;
      for (std::size_t m = 0; m < in.nodes(); ++m) {
        jobs += sol.job_split(s, m);
        for (std::size_t r = 0; r < in.resource_types(); ++r) {
          CHECK(sol.job_split(s, m) <= sol.allocation.mec(s, m, r) / in.mec_demand(s, r) + tol);
        }
      }
      CHECK(sol.utilities[s] <= jobs + tol);
      CHECK(sol.utilities[s] <= ran_jobs(in, sol.allocation, s) + tol);
      CHECK(sol.utilities[s] >= 1e-9);
    }
    for (double p : sol.mec_prices.values()) CHECK(p >= -tol);
    for (double p : sol.ran_prices) CHECK(p >= -tol);
    CHECK(sol.duality_gap < 1e-6);
  }
}

TEST_CASE("determinism, scale invariance and uniqueness") {
  const auto in = t::random_instance(42, {4, 3, 3, 3});
  const auto a = solve_eg(in);
  const auto b = solve_eg(in);
  CHECK(a.solver_status == b.solver_status);
  for (std::size_t s = 0; s < in.providers(); ++s) {
    CHECK(std::abs(a.utilities[s] - b.utilities[s]) <= 1e-10);
  }

  auto scaled = in;
  for (auto& B : scaled.budgets) B *= 7.0;
  const auto c = solve_eg(scaled);
  for (std::size_t s = 0; s < in.providers(); ++s) {
    CHECK(std::abs(a.utilities[s] - c.utilities[s]) <= 1e-6);
  }

  SolverSettings random_start;
  random_start.initial_point = InitialPoint::random;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    random_start.seed = seed;
    const auto d = solve_eg(in, random_start);
    REQUIRE(d.solver_status == SolverStatus::converged);
    for (std::size_t s = 0; s < in.providers(); ++s) {
      CHECK(std::abs(a.utilities[s] - d.utilities[s]) <= 1e-6);
    }
  }
}

TEST_CASE("iteration limit is reported with the best iterate") {
  SolverSettings settings;
  settings.max_iterations = 2;
  const auto sol = solve_eg(t::random_instance(5, {4, 3, 3, 3}), settings);
  CHECK(sol.solver_status == SolverStatus::max_iterations);
  CHECK(sol.utilities.size() == sol.allocation.providers());
}

TEST_CASE("bad input") {
  auto in = t::single_node();
  in.budgets[0] = 0.0;
  CHECK_THROWS_AS((void)solve_eg(in), InstanceError);

  SolverSettings s;
  s.kkt_tolerance = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = {};
  s.utility_floor = -1.0;
  CHECK_THROWS_AS((void)solve_eg(t::single_node(), s), std::invalid_argument);
}
