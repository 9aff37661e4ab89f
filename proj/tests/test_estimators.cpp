#include "doctest.h"

#include <cmath>

#include "restore/estimators.hpp"
#include "restore/stats.hpp"

using namespace restore;

namespace {

Event ev(double t, EventKind k, double x) { return {t, k, {x}}; }

// Piecewise-constant path with three full tours and a cut tail:
//   [0,3):   x = 2 then 4   (opening tour, default-excluded)
//   [3,6):   x = 1 then 5   (tau 3, Z_x = 1 + 10 = 11)
//   [6,7.5): x = 0          (tau 1.5, Z_x = 0)
//   [7.5,8): x = 3          (cut by the horizon, always excluded)
Trajectory pc_trajectory() {
    Trajectory traj;
    traj.dim = 1;
    traj.total_time = 8.0;
    traj.path_kind = PathKind::PiecewiseConstant;
    traj.events = {
        ev(0.0, EventKind::Initial, 2.0),      ev(1.0, EventKind::LocalMove, 4.0),
        ev(3.0, EventKind::Regeneration, 1.0), ev(4.0, EventKind::LocalMove, 5.0),
        ev(6.0, EventKind::Regeneration, 0.0), ev(7.5, EventKind::Regeneration, 3.0),
        ev(8.0, EventKind::FinalState, 3.0),
    };
    traj.regen_count = 3;
    traj.steps = 5;
    return traj;
}

double fx(const Vec& x) { return x[0]; }

}  // namespace

TEST_CASE("tour integrals on a piecewise-constant path are exact") {
    Trajectory traj = pc_trajectory();
    TourStats s = tour_integrals(traj, fx);
    REQUIRE(s.n_tours() == 2);
    CHECK(s.z[0] == doctest::Approx(11.0));
    CHECK(s.z[1] == doctest::Approx(0.0).scale(1.0));
    CHECK(s.tau[0] == doctest::Approx(3.0));
    CHECK(s.tau[1] == doctest::Approx(1.5));
    CHECK(s.excluded_first == 1);
    CHECK(s.excluded_partial == 1);
    CHECK(estimate(s) == doctest::Approx(11.0 / 4.5));

    TourStats with_first = tour_integrals(traj, fx, true);
    REQUIRE(with_first.n_tours() == 3);
    CHECK(with_first.z[0] == doctest::Approx(10.0));  // 2*1 + 4*2
    CHECK(with_first.excluded_first == 0);
}

TEST_CASE("constant integrand gives zero variance and infinite effective size") {
    Trajectory traj = pc_trajectory();
    TourStats s = tour_integrals(traj, [](const Vec&) { return 1.0; });
    CHECK(estimate(s) == doctest::Approx(1.0));
    CHECK(sigma2_hat(s) == doctest::Approx(0.0).scale(1.0));
    CHECK(std::isinf(n_eff(s, 1.0)));
}

TEST_CASE("variance estimate matches the regenerative formula by hand") {
    Trajectory traj = pc_trajectory();
    TourStats s = tour_integrals(traj, fx);
    const double est = 11.0 / 4.5;
    const double r0 = 11.0 - est * 3.0;
    const double r1 = 0.0 - est * 1.5;
    const double tau_bar = 4.5 / 2.0;
    const double expect = (r0 * r0 + r1 * r1) / (2.0 * tau_bar * tau_bar);
    CHECK(sigma2_hat(s) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("estimates scale linearly and variances quadratically") {
    Trajectory traj = pc_trajectory();
    TourStats s1 = tour_integrals(traj, fx);
    TourStats s3 = tour_integrals(traj, [](const Vec& x) { return 3.0 * x[0]; });
    CHECK(estimate(s3) == doctest::Approx(3.0 * estimate(s1)));
    CHECK(sigma2_hat(s3) == doctest::Approx(9.0 * sigma2_hat(s1)));
}

TEST_CASE("confidence interval width and flags") {
    Trajectory traj = pc_trajectory();
    TourStats s = tour_integrals(traj, fx);
    ConfidenceInterval ci = confidence_interval(s, 0.95);
    CHECK(ci.small_sample);  // two tours
    const double z = stats::norm_ppf(0.975);
    const double half = z * std::sqrt(sigma2_hat(s) / 2.0);
    CHECK(ci.high - ci.low == doctest::Approx(2.0 * half).epsilon(1e-12));
    CHECK((ci.low + ci.high) / 2.0 == doctest::Approx(estimate(s)).epsilon(1e-12));

    // Quadrupling the tours at the same moments halves the width.
    TourStats s4 = s;
    for (int rep = 0; rep < 3; ++rep) {
        s4.z.insert(s4.z.end(), s.z.begin(), s.z.end());
        s4.tau.insert(s4.tau.end(), s.tau.begin(), s.tau.end());
    }
    ConfidenceInterval ci4 = confidence_interval(s4, 0.95);
    CHECK(ci4.high - ci4.low == doctest::Approx((ci.high - ci.low) / 2.0).epsilon(1e-9));

    CHECK_THROWS_AS(confidence_interval(s, 1.5), ConfigError);
    CHECK_THROWS_AS(confidence_interval(s, 0.0), ConfigError);
}

TEST_CASE("effective sample size uses the plug-in variance ratio") {
    Trajectory traj = pc_trajectory();
    TourStats s = tour_integrals(traj, fx);
    double v = variance_under_pi(traj, fx);
    // Time-weighted moments over the two complete tours.
    const double m1 = 11.0 / 4.5;
    const double m2 = (1.0 * 1.0 + 25.0 * 2.0) / 4.5;
    CHECK(v == doctest::Approx(m2 - m1 * m1).epsilon(1e-12));
    CHECK(n_eff(s, v) == doctest::Approx(2.0 * v / sigma2_hat(s)).epsilon(1e-12));
}

TEST_CASE("candidate-grid tours average f over candidates") {
    Trajectory traj;
    traj.dim = 1;
    traj.total_time = 2.2;
    traj.path_kind = PathKind::CandidateGrid;
    traj.events = {
        ev(0.0, EventKind::Initial, 0.0),      ev(0.2, EventKind::LocalMove, 1.0),
        ev(0.5, EventKind::LocalMove, 3.0),    ev(0.8, EventKind::Regeneration, 9.0),
        ev(1.0, EventKind::LocalMove, 2.0),    ev(1.4, EventKind::Regeneration, 7.0),
        ev(2.0, EventKind::Regeneration, 5.0), ev(2.2, EventKind::FinalState, 5.0),
    };
    traj.regen_count = 3;
    traj.steps = 6;
    TourStats s = tour_integrals(traj, fx);
    REQUIRE(s.n_tours() == 2);
    // Tour [0.8, 1.4): one candidate at x = 2, tau = 0.6: Z = 0.6 * 2.
    CHECK(s.z[0] == doctest::Approx(1.2));
    // Tour [1.4, 2.0): no candidates: Z = 0, counted.
    CHECK(s.z[1] == doctest::Approx(0.0).scale(1.0));
    CHECK(s.empty_candidate_tours == 1);
    // Opening tour has two candidates: Z = 0.8 * (1 + 3) / 2.
    TourStats sf = tour_integrals(traj, fx, true);
    CHECK(sf.z[0] == doctest::Approx(1.6));
}

TEST_CASE("insufficient data is reported rather than guessed") {
    Trajectory traj;
    traj.dim = 1;
    traj.total_time = 1.0;
    traj.events = {ev(0.0, EventKind::Initial, 0.0), ev(1.0, EventKind::FinalState, 0.0)};
    CHECK_THROWS_AS(tour_integrals(traj, fx), InsufficientData);

    TourStats one;
    one.z = {1.0};
    one.tau = {1.0};
    CHECK_THROWS_AS(sigma2_hat(one), InsufficientData);
    TourStats none;
    CHECK_THROWS_AS(estimate(none), InsufficientData);
}

TEST_CASE("summarize bundles the report") {
    Trajectory traj = pc_trajectory();
    EstimateReport r = summarize(traj, fx);
    CHECK(r.estimate == doctest::Approx(11.0 / 4.5));
    CHECK(r.n_tours == 2);
    CHECK(r.excluded_tours == 2);
    CHECK(r.total_time == doctest::Approx(8.0));
    CHECK(r.small_sample);
    CHECK(r.level == doctest::Approx(0.95));
    CHECK(r.ci_low < r.estimate);
    CHECK(r.ci_high > r.estimate);
}
