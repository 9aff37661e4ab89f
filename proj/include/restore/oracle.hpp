#pragma once

#include <Eigen/Dense>

#include "restore/model.hpp"
#include "restore/sampler.hpp"

namespace restore::oracle {

// Full generator of the regeneration-enriched chain:
//   L[i][j] = Q[i][j] + kappa(i) (mu(j) - delta_ij).
struct FullGenerator {
    Eigen::MatrixXd L;
    Eigen::VectorXd kappa;
};

FullGenerator full_generator(const DiscreteModel& model);
// Same assembly with caller-supplied rates (for perturbation checks).
FullGenerator full_generator_with_kappa(const DiscreteModel& model,
                                        const Eigen::VectorXd& kappa);

// || pi^T L ||_inf: zero (to rounding) iff pi is invariant for L.
double invariance_residual(const Eigen::VectorXd& pi, const Eigen::MatrixXd& L);
double check_invariance(const DiscreteModel& model);

// Stationary probability vector of a conservative irreducible generator;
// RankError when the kernel of L^T is not one-dimensional.
Eigen::VectorXd stationary_vector(const Eigen::MatrixXd& L);

// Random test model: Q off-diagonals Exp(1), pi and mu Dirichlet(1), and C the
// smallest value keeping every kappa(i) nonnegative, plus 0.1 slack.
DiscreteModel random_discrete_model(int n_states, std::uint64_t seed);

// p-value of the hypothesis that the long-run occupation fractions equal
// pi_ref, using the regenerative central limit theorem: the delta-method
// covariance of the ratio estimator is estimated from tour moments (see
// OccupationStats in sampler.hpp) and the quadratic form compared against
// chi-square with n-1 degrees of freedom.
double occupation_chi2_pvalue(const OccupationStats& stats, const Eigen::VectorXd& pi_ref);

}  // namespace restore::oracle
