#include "doctest.h"

#include <cmath>
#include <vector>

#include "restore/clocks.hpp"
#include "restore/dynamics.hpp"
#include "restore/rng.hpp"
#include "restore/stats.hpp"

using namespace restore;

TEST_CASE("competing exponentials pick clocks proportionally to rates") {
    RngStream rng(60, 0);
    const int n = 40000;
    int wins = 0;
    std::vector<double> times(n);
    for (int i = 0; i < n; ++i) {
        auto r = competing_exponentials({1.0, 3.0}, rng);
        if (r.index == 1) ++wins;
        times[i] = r.time;
    }
    // P(index 1) = 3/4; binomial s.e. ~ 0.0022.
    CHECK(static_cast<double>(wins) / n == doctest::Approx(0.75).epsilon(0.015));
    auto cdf = [](double t) { return 1.0 - std::exp(-4.0 * t); };
    CHECK(stats::ks_test(times, cdf) > 0.001);
}

TEST_CASE("zero-rate clocks never win and all-zero is an error") {
    RngStream rng(61, 0);
    for (int i = 0; i < 2000; ++i)
        CHECK(competing_exponentials({0.0, 2.0, 0.0}, rng).index == 1);
    CHECK_THROWS_AS(competing_exponentials({0.0, 0.0}, rng), DegenerateClockError);
    CHECK_THROWS_AS(competing_exponentials({-1.0, 2.0}, rng), DegenerateClockError);
}

TEST_CASE("thinned first arrival has the exact law for a constant rate") {
    Dynamics bm = Dynamics::brownian(1);
    auto rate = [](const Vec&) { return 1.5; };
    RngStream rng(62, 0);
    std::vector<double> times(20000);
    for (auto& t : times) {
        FirstArrival fa = thinned_first_arrival(bm, {0.0}, rate, 2.0, 1e9, rng);
        REQUIRE(fa.arrived);
        t = fa.time;
    }
    auto cdf = [](double t) { return 1.0 - std::exp(-1.5 * t); };
    CHECK(stats::ks_test(times, cdf) > 0.001);
}

TEST_CASE("thinned first arrival skeleton bookkeeping") {
    Dynamics bm = Dynamics::brownian(1);
    auto rate = [](const Vec& x) { return std::min(1.0, x[0] * x[0]); };
    RngStream rng(63, 0);
    for (int rep = 0; rep < 200; ++rep) {
        FirstArrival fa = thinned_first_arrival(bm, {0.3}, rate, 1.0, 4.0, rng);
        REQUIRE(fa.skeleton.times.size() == fa.skeleton.states.size());
        REQUIRE(fa.skeleton.times.front() == 0.0);
        CHECK(fa.skeleton.states.front()[0] == 0.3);
        for (std::size_t i = 1; i < fa.skeleton.times.size(); ++i)
            CHECK(fa.skeleton.times[i] >= fa.skeleton.times[i - 1]);
        CHECK(fa.skeleton.times.back() == doctest::Approx(fa.time));
        CHECK(fa.skeleton.states.back()[0] == fa.state[0]);
        if (fa.arrived) {
            CHECK(fa.n_candidates >= 1);
            CHECK(static_cast<std::size_t>(fa.n_candidates) + 1 == fa.skeleton.times.size());
        } else {
            CHECK(fa.time == 4.0);
            CHECK(static_cast<std::size_t>(fa.n_candidates) + 2 == fa.skeleton.times.size());
        }
    }
}

TEST_CASE("thinning rejects rates above the bound") {
    Dynamics bm = Dynamics::brownian(1);
    RngStream rng(64, 0);
    auto rate = [](const Vec&) { return 3.0; };
    CHECK_THROWS_AS(thinned_first_arrival(bm, {0.0}, rate, 2.0, 1e9, rng),
                    BoundViolationError);
    CHECK_THROWS_AS(thinned_first_arrival(bm, {0.0}, rate, 0.0, 1e9, rng),
                    DegenerateClockError);
}

TEST_CASE("split lifetime reproduces both marginals for a constant rate") {
    // kappa = 3 with M = 1.5: truncated clock Exp(1.5), excess clock Exp(1.5),
    // full lifetime Exp(3).
    Dynamics bm = Dynamics::brownian(1);
    auto kappa = [](const Vec&) { return 3.0; };
    RngStream rng(65, 0);
    const int n = 10000;
    std::vector<double> trunc(n), excess(n), full(n);
    for (int i = 0; i < n; ++i) {
        SplitLifetime s = split_lifetime(bm, {0.0}, kappa, 1.5, rng, 50.0, 0.05);
        REQUIRE(!s.trunc_capped);
        REQUIRE(!s.excess_capped);
        CHECK(s.tau_min == std::min(s.tau_trunc, s.tau_excess));
        trunc[i] = s.tau_trunc;
        excess[i] = s.tau_excess;
        full[i] = s.tau_min;
    }
    auto cdf15 = [](double t) { return 1.0 - std::exp(-1.5 * t); };
    auto cdf30 = [](double t) { return 1.0 - std::exp(-3.0 * t); };
    CHECK(stats::ks_test(trunc, cdf15) > 0.001);
    CHECK(stats::ks_test(excess, cdf15) > 0.001);
    CHECK(stats::ks_test(full, cdf30) > 0.001);
}

TEST_CASE("split lifetime caps runaway clocks at the horizon") {
    // kappa = M: the excess rate vanishes, so the excess clock must cap.
    Dynamics bm = Dynamics::brownian(1);
    auto kappa = [](const Vec&) { return 1.0; };
    RngStream rng(66, 0);
    SplitLifetime s = split_lifetime(bm, {0.0}, kappa, 1.0, rng, 5.0, 0.05);
    CHECK(s.excess_capped);
    CHECK(s.tau_excess == 5.0);
}
