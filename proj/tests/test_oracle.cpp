#include "doctest.h"

#include <cmath>

#include "restore/oracle.hpp"
#include "restore/sampler.hpp"

using namespace restore;

namespace {

DiscreteModel two_state(double C) {
    Eigen::MatrixXd Q(2, 2);
    Q << -2, 2, 1, -1;
    Eigen::VectorXd pi(2), mu(2);
    pi << 0.5, 0.5;
    mu << 0.5, 0.5;
    return DiscreteModel(Q, pi, mu, C);
}

}  // namespace

TEST_CASE("full generator of the two-state model") {
    DiscreteModel m = two_state(1.0);
    oracle::FullGenerator g = oracle::full_generator(m);
    CHECK(g.kappa(0) == doctest::Approx(0.0).scale(1.0));
    CHECK(g.kappa(1) == doctest::Approx(2.0));
    CHECK(g.L(0, 0) == doctest::Approx(-2.0));
    CHECK(g.L(0, 1) == doctest::Approx(2.0));
    CHECK(g.L(1, 0) == doctest::Approx(2.0));
    CHECK(g.L(1, 1) == doctest::Approx(-2.0));
    CHECK(oracle::invariance_residual(m.pi, g.L) < 1e-12);
}

TEST_CASE("random models are invariant by construction") {
    for (std::uint64_t seed : {1ULL, 7ULL, 42ULL, 99ULL, 12345ULL}) {
        for (int n : {2, 4, 7}) {
            DiscreteModel m = oracle::random_discrete_model(n, seed);
            CHECK(oracle::check_invariance(m) < 1e-12);
            // Generator rows sum to zero with nonnegative off-diagonals.
            for (int i = 0; i < n; ++i) {
                CHECK(std::fabs(m.Q.row(i).sum()) < 1e-10);
                for (int j = 0; j < n; ++j)
                    if (i != j) CHECK(m.Q(i, j) >= 0.0);
            }
            CHECK(m.pi.sum() == doctest::Approx(1.0));
            CHECK(m.mu.sum() == doctest::Approx(1.0));
            Eigen::VectorXd kap = regen_rates_discrete(m);
            for (int i = 0; i < n; ++i) CHECK(kap(i) >= 0.0);
        }
    }
    // Reproducible and seed-sensitive.
    DiscreteModel a = oracle::random_discrete_model(4, 5);
    DiscreteModel b = oracle::random_discrete_model(4, 5);
    DiscreteModel c = oracle::random_discrete_model(4, 6);
    CHECK((a.Q - b.Q).norm() == 0.0);
    CHECK((a.Q - c.Q).norm() > 0.0);
}

TEST_CASE("perturbing the rates breaks invariance detectably") {
    DiscreteModel m = oracle::random_discrete_model(5, 42);
    Eigen::VectorXd kap = regen_rates_discrete(m);
    double base = oracle::invariance_residual(m.pi, oracle::full_generator_with_kappa(m, kap).L);
    CHECK(base < 1e-12);
    Eigen::VectorXd bumped = kap;
    bumped(2) += 1.0;
    double off = oracle::invariance_residual(m.pi, oracle::full_generator_with_kappa(m, bumped).L);
    CHECK(off > 0.01);
}

TEST_CASE("stationary vector solves the full generator") {
    for (std::uint64_t seed : {3ULL, 42ULL, 1001ULL}) {
        DiscreteModel m = oracle::random_discrete_model(6, seed);
        Eigen::VectorXd v = oracle::stationary_vector(oracle::full_generator(m).L);
        CHECK((v - m.pi).cwiseAbs().maxCoeff() < 1e-9);
    }
    // Two disconnected blocks: the stationary law is not unique.
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(4, 4);
    L(0, 0) = -1; L(0, 1) = 1; L(1, 0) = 1; L(1, 1) = -1;
    L(2, 2) = -2; L(2, 3) = 2; L(3, 2) = 2; L(3, 3) = -2;
    CHECK_THROWS_AS(oracle::stationary_vector(L), RankError);
}

TEST_CASE("occupation chi-square rejects a wrong reference and needs enough tours") {
    DiscreteModel m = oracle::random_discrete_model(4, 42);
    OccupationStats occ = run_discrete_occupation(m, 0, 20000.0, 9);
    CHECK(oracle::occupation_chi2_pvalue(occ, m.pi) > 0.001);
    Eigen::VectorXd wrong = m.pi;
    wrong(0) *= 1.6;
    wrong /= wrong.sum();
    CHECK(oracle::occupation_chi2_pvalue(occ, wrong) < 1e-6);

    OccupationStats few = occ;
    few.n_tours = 10;
    CHECK_THROWS_AS(oracle::occupation_chi2_pvalue(few, m.pi), InsufficientData);
}
