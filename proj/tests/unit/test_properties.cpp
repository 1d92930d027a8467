#include <doctest.h>

#include <cmath>

#include "edgemarket/analysis.hpp"
#include "edgemarket/mechanisms.hpp"
#include "edgemarket/scenario.hpp"
#include "property_suite.hpp"

using namespace edgemarket;
namespace t = edgemarket::testing;

TEST_CASE("utility and solver properties on random instances") {
  const auto suite = t::run_property_suite(1000, 12);
  for (const auto* tally : suite.all()) {
    INFO(tally->name << " worst residual " << tally->worst);
    CHECK(tally->checked == 12);
    CHECK(tally->failures.empty());
  }
}

TEST_CASE("welfare ordering, sharing incentive and NSW maximality") {
  DeploymentTemplate d;
  d.provider_count = 8;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto in = generate_instance(d, instance_seed(99, seed));
    const auto me = run_mechanism(in, Mechanism::me);
    const auto so = run_mechanism(in, Mechanism::so);
    const auto wso = run_mechanism(in, Mechanism::wso);
    const auto ps = run_mechanism(in, Mechanism::ps);
    CHECK(so.social_welfare >= wso.social_welfare - 1e-6);
    CHECK(so.social_welfare >= me.social_welfare - 1e-6);
    CHECK(me.social_welfare >= ps.social_welfare - 1e-6);
    // WSO is optimal for the budget-weighted sum, not for plain welfare.
    double weighted_wso = 0.0, weighted_me = 0.0;
    for (std::size_t s = 0; s < in.providers(); ++s) {
      weighted_wso += in.budgets[s] * wso.utilities[s];
      weighted_me += in.budgets[s] * me.utilities[s];
    }
    CHECK(weighted_wso >= weighted_me - 1e-6);
    for (std::size_t s = 0; s < in.providers(); ++s) CHECK(me.utilities[s] >= ps.utilities[s] - 1e-6);

    const double me_log = log_nash_social_welfare(me.utilities, in.budgets);
    const double tol = 1e-6 * std::max(1.0, std::abs(me_log));
    CHECK(log_nash_social_welfare(ps.utilities, in.budgets) <= me_log + tol);
    CHECK(log_nash_social_welfare(so.utilities, in.budgets) <= me_log + tol);
  }
}

TEST_CASE("passing the KKT check implies passing the equilibrium check") {
  for (std::uint64_t seed = 300; seed < 310; ++seed) {
    const auto in = t::random_instance(seed, {5, 3, 3, 3});
    const auto eq = solve_eg(in);
    if (kkt_residuals(in, eq).max_abs < 1e-6) {
      CHECK(check_market_equilibrium(in, eq, 1e-5).passed());
    }
  }
}

TEST_CASE("social optimum can lose all NSW fairness") {
  double previous = 0.0;
  for (double budget : {1.0, 2.0, 4.0}) {
    const auto w = t::fairness_loss_witness(3, budget);
    CHECK(w.all_to_one_welfare == doctest::Approx(w.so_welfare).epsilon(1e-7));
    CHECK(w.nsw_all_to_one == 0.0);
    CHECK(w.nsw_me > 0.0);
    CHECK(w.me_welfare == doctest::Approx(w.so_welfare).epsilon(1e-7));
    // The gap to the zero NSW of the social optimum grows with the budget.
    CHECK(w.nsw_me > previous);
    previous = w.nsw_me;
  }
}
