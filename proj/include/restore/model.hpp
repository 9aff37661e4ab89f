#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>

#include "restore/common.hpp"
#include "restore/rng.hpp"

namespace restore {

// Unnormalized target on R^d. log_density returns log(pibar) up to an
// additive constant; U = -log(pibar). When analytic derivatives are absent
// they are replaced by central finite differences of log_density with step
// fd_step.
struct TargetModel {
    int dim = 1;
    std::function<double(const Vec&)> log_density;
    std::function<Vec(const Vec&)> grad_U_fn;          // optional
    std::function<double(const Vec&)> laplacian_U_fn;  // optional
    double fd_step = 1e-5;

    static TargetModel analytic(int dim, std::function<double(const Vec&)> logp,
                                std::function<Vec(const Vec&)> grad_u,
                                std::function<double(const Vec&)> lap_u);
    static TargetModel finite_difference(int dim, std::function<double(const Vec&)> logp,
                                         double h = 1e-5);

    bool analytic_derivatives() const { return static_cast<bool>(grad_U_fn); }

    double logp(const Vec& x) const;  // checked: finite, else EvaluationError
    Vec grad_U(const Vec& x) const;
    double laplacian_U(const Vec& x) const;
};

// Drift field b of the local diffusion dY = b(Y) dt + dB, together with its
// divergence (needed by the partial regeneration rate). For gradient drifts
// b = grad A the divergence is the Laplacian of A.
struct DriftField {
    std::function<Vec(const Vec&)> b;
    std::function<double(const Vec&)> div_b;

    static DriftField zero(int dim);
    // b(x) = theta * x, div b = theta * dim.
    static DriftField linear(int dim, double theta);
    // Divergence approximated by central differences of b.
    static DriftField numeric(int dim, std::function<Vec(const Vec&)> drift, double h = 1e-5);
};

// Regeneration distribution: unnormalized log-density, a sampler, and the
// regeneration constant C. Normalization conventions are the caller's: only
// the ratio C * mubar / pibar enters the rates, so C absorbs any mismatch.
struct RegenDistribution {
    int dim = 1;
    std::function<double(const Vec&)> log_density;
    std::function<Vec(RngStream&)> sample;
    double C = 1.0;
};

// Partial regeneration rate of the diffusion with drift b against target
// pibar (Lebesgue form):
//   kappa_tilde = 1/2 (-lap U + |grad U|^2) + b . grad U - div b,
// with U = -log pibar. For zero drift this is 1/2 (-lap U + |grad U|^2).
double partial_rate_diffusion(const TargetModel& target, const DriftField& drift, const Vec& x);

// Full diffusion regeneration rate kappa = kappa_tilde + C mubar / pibar.
// Values below -1e-9 raise NegativeRateError; values in [-1e-9, 0) clamp to 0.
double regen_rate(const TargetModel& target, const RegenDistribution& mu, const DriftField& drift,
                  const Vec& x);

// Finite-state model: conservative generator Q (rows sum to zero, off-diagonal
// nonnegative), target pi, regeneration distribution mu, constant C. pi and mu
// are normalized on construction, so unnormalized inputs are accepted.
struct DiscreteModel {
    Eigen::MatrixXd Q;
    Eigen::VectorXd pi;
    Eigen::VectorXd mu;
    double C = 1.0;

    DiscreteModel(Eigen::MatrixXd q, Eigen::VectorXd pi_in, Eigen::VectorXd mu_in, double c);
    int n() const { return static_cast<int>(Q.rows()); }
};

// kappa(i) = (pi^T Q)_i / pi_i + C mu_i / pi_i, same negativity contract as
// regen_rate.
double regen_rate_discrete(const DiscreteModel& model, int state);
Eigen::VectorXd regen_rates_discrete(const DiscreteModel& model);

// Jump-process regeneration rate. `flow` supplies the integral
// int pi(y) lambda(y) p(y, x) m(dy) under whatever summation or quadrature
// rule fits the state space; pi/mu are plain densities here (linear scale).
double regen_rate_jump(const std::function<double(const Vec&)>& flow,
                       const std::function<double(const Vec&)>& lambda,
                       const std::function<double(const Vec&)>& pi,
                       const std::function<double(const Vec&)>& mu, double C, const Vec& x);

// Flow of a Metropolis-Hastings kernel with proposal density q(y, x),
// acceptance alpha(y, x) and total jump probability j(y) = int alpha(y,z)q(y,z) dz:
//   flow(x) = int pi(y) lambda(y) alpha(y, x) q(y, x) dy + lambda(x)(1 - j(x)) pi(x),
// i.e. the rejected-move atom is folded back into the flow. `integrate` maps
// an integrand over the y variable (a quadrature rule chosen by the caller).
double mh_flow(
    const std::function<double(const std::function<double(const Vec&)>&)>& integrate,
    const std::function<double(const Vec&)>& pi, const std::function<double(const Vec&)>& lambda,
    const std::function<double(const Vec&, const Vec&)>& alpha,
    const std::function<double(const Vec&, const Vec&)>& q,
    const std::function<double(const Vec&)>& total_jump_prob, const Vec& x);

}  // namespace restore
