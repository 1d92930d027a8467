#include <doctest.h>

#include <cmath>

#include "edgemarket/mechanisms.hpp"
#include "fixtures.hpp"

using namespace edgemarket;
namespace t = edgemarket::testing;

TEST_CASE("proportional sharing splits every good by budget") {
  auto in = t::single_node(2);
  in.budgets = {1.0, 3.0};
  const auto ps = allocate_proportional_sharing(in);
  CHECK(ps.mechanism == Mechanism::ps);
  CHECK(ps.allocation.mec(0, 0, 0) == doctest::Approx(8.0));
  CHECK(ps.allocation.mec(0, 0, 1) == doctest::Approx(32.0));
  CHECK(ps.allocation.ran(0, 0) == doctest::Approx(10.0));
  CHECK(ps.allocation.mec(1, 0, 0) == doctest::Approx(24.0));
  CHECK(ps.utilities[0] == doctest::Approx(2.0));  // min(min(2, 4), 10/3)

  // Capacity is exhausted exactly.
  CHECK(ps.allocation.mec(0, 0, 0) + ps.allocation.mec(1, 0, 0) == 32.0);
  CHECK(ps.allocation.ran(0, 0) + ps.allocation.ran(1, 0) == 40.0);
}

TEST_CASE("equal budgets halve every resource") {
  const auto ps = allocate_proportional_sharing(t::asymmetric_pair());
  CHECK(ps.allocation.mec(0, 0, 0) == 16.0);
  CHECK(ps.allocation.mec(1, 0, 1) == 64.0);
  CHECK(ps.allocation.ran(1, 0) == 20.0);
}

TEST_CASE("run_mechanism dispatch") {
  const auto in = t::capacity_ten();
  const auto ps = run_mechanism(in, Mechanism::ps);
  const auto direct = allocate_proportional_sharing(in);
  CHECK(ps.allocation == direct.allocation);
  CHECK(ps.utilities == direct.utilities);

  const auto so = run_mechanism(in, Mechanism::so);
  CHECK(so.mechanism == Mechanism::so);
  CHECK(so.social_welfare == doctest::Approx(10.0).epsilon(1e-7));

  const auto me = run_mechanism(in, Mechanism::me);
  CHECK(me.mechanism == Mechanism::me);
  CHECK(me.social_welfare == doctest::Approx(7.5).epsilon(1e-7));
  CHECK(me.prices.has_value());

  auto weighted = in;
  weighted.budgets = {1.0, 10.0};
  const auto wso = run_mechanism(weighted, Mechanism::wso);
  CHECK(wso.mechanism == Mechanism::wso);
  CHECK(wso.objective_value == doctest::Approx(50.0).epsilon(1e-7));
  CHECK_FALSE(wso.prices.has_value());
}

TEST_CASE("utilities are re-evaluated from the allocation") {
  const auto in = t::random_instance(3, {3, 2, 2, 2});
  for (Mechanism m : {Mechanism::me, Mechanism::so, Mechanism::wso, Mechanism::ps}) {
    const auto r = run_mechanism(in, m);
    const auto u = utilities(in, r.allocation);
    for (std::size_t s = 0; s < u.size(); ++s) CHECK(r.utilities[s] == u[s]);
  }
}

TEST_CASE("mechanism names") {
  CHECK(parse_mechanism("wso") == Mechanism::wso);
  CHECK(parse_mechanism("Me") == Mechanism::me);
  CHECK_FALSE(parse_mechanism("DRF").has_value());
  CHECK(to_string(Mechanism::ps) == "PS");
}
