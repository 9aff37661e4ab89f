#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "restore/rng.hpp"
#include "restore/stats.hpp"

using namespace restore;

TEST_CASE("normal cdf and quantile invert each other") {
    CHECK(stats::norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(stats::norm_ppf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-9));
    for (double p : {0.001, 0.1, 0.5, 0.9, 0.999})
        CHECK(stats::norm_cdf(stats::norm_ppf(p)) == doctest::Approx(p).epsilon(1e-9));
}

TEST_CASE("chi-square survival function matches known values") {
    // chi2_sf(x, k) for even k has closed forms: k=2 -> exp(-x/2).
    CHECK(stats::chi2_sf(3.0, 2.0) == doctest::Approx(std::exp(-1.5)).epsilon(1e-10));
    CHECK(stats::chi2_sf(0.0, 5.0) == doctest::Approx(1.0).epsilon(1e-12));
    // Median of chi2(1) is about 0.454936.
    CHECK(stats::chi2_sf(0.454936, 1.0) == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("ks test is calibrated on exponential samples") {
    // Meta-test: with the correct null CDF the p-value should not be tiny,
    // and with a wrong scale it should collapse.
    RngStream rng(20240901, 0);
    std::vector<double> xs(4000);
    for (auto& x : xs) x = rng.exponential(2.0);
    auto cdf_right = [](double t) { return 1.0 - std::exp(-2.0 * t); };
    auto cdf_wrong = [](double t) { return 1.0 - std::exp(-1.0 * t); };
    CHECK(stats::ks_test(xs, cdf_right) > 0.001);
    CHECK(stats::ks_test(xs, cdf_wrong) < 1e-6);
}

TEST_CASE("two-sample ks separates shifted samples") {
    RngStream rng(7, 0);
    std::vector<double> a(3000), b(3000), c(3000);
    for (auto& x : a) x = rng.normal();
    for (auto& x : b) x = rng.normal();
    for (auto& x : c) x = rng.normal() + 0.5;
    CHECK(stats::ks_two_sample(a, b).pvalue > 0.001);
    CHECK(stats::ks_two_sample(a, c).pvalue < 1e-6);
}

TEST_CASE("chi2 test pools sparse cells and detects mismatch") {
    std::vector<double> expected = {100, 100, 100, 2};  // last cell pooled
    std::vector<double> obs_ok = {101, 96, 103, 2};
    std::vector<double> obs_bad = {160, 60, 80, 2};
    auto r1 = stats::chi2_test(obs_ok, expected);
    auto r2 = stats::chi2_test(obs_bad, expected);
    CHECK(r1.dof == doctest::Approx(2.0));  // 3 cells after pooling
    CHECK(r1.pvalue > 0.01);
    CHECK(r2.pvalue < 1e-6);
}

TEST_CASE("rng streams are reproducible and distinct") {
    RngStream a(42, 7), b(42, 7), c(42, 8);
    for (int i = 0; i < 16; ++i) {
        double ua = a.uniform();
        CHECK(ua == b.uniform());
        CHECK(ua != c.uniform());
    }
}

TEST_CASE("exponential draws have the requested rate") {
    RngStream rng(5, 0);
    double mean = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) mean += rng.exponential(4.0);
    mean /= n;
    CHECK(mean == doctest::Approx(0.25).epsilon(0.02));
}
