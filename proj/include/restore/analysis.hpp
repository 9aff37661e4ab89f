#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "restore/dynamics.hpp"
#include "restore/model.hpp"
#include "restore/quadrature.hpp"
#include "restore/rng.hpp"

namespace restore {

// max(partial_rate_diffusion(x), kappa_floor): the regeneration rate obtained
// with the minimal regeneration distribution, computable without knowing it.
double kappa_star(const TargetModel& target, const DriftField& drift, double kappa_floor,
                  const Vec& x);

// Minimal regeneration distribution for a diffusion target: density
// proportional to (kappa_floor - partial_rate)^+ * pibar, supported where the
// partial rate sits below the floor. C_star is its compensation constant
// against the normalized target, so that partial_rate + C_star mu*/pi equals
// max(partial_rate, kappa_floor) pointwise.
struct MinimalRegen {
    int dim = 1;
    double kappa_floor = 0.0;
    std::function<double(const Vec&)> log_mu_star_unnorm;
    double C_star = 0.0;
    double log_I = 0.0;     // log of the box integral of the unnormalized density
    double log_Z_pi = 0.0;  // log of the target normalizer
    Box envelope_box;
    double envelope_height = 0.0;  // 1.01 * grid max of the unnormalized density

    // Normalized density log mu*(x).
    double log_density(const Vec& x) const;
    // Rejection sampler from uniform-on-box against envelope_height, packaged
    // with C = C_star.
    RegenDistribution as_regen() const;
};

// Build mu* by tensor-grid quadrature over envelope_box (n_grid points per
// axis, dims <= 3). The box must contain the support: the unnormalized
// density has to vanish on the box faces (BoxTooSmall otherwise); a floor at
// or below the partial rate's box minimum leaves the density identically zero
// (FloorTooLow).
MinimalRegen build_minimal_regen(const TargetModel& target, const DriftField& drift,
                                 double kappa_floor, const Box& envelope_box, int n_grid = 2001);

struct MinorizationCheck {
    double epsilon = 0.0;  // min over grid of C mu / (C_star mu*), on supp mu*
    bool ok = false;       // epsilon >= 1 - 1e-9
    bool c_ok = false;     // mu.C >= C_star - 1e-9
};

// Grid check that (mu, C) dominates the minimal pair: C mu(x) >= C* mu*(x) on
// the support of mu*. Meaningful when mu.log_density is normalized (all
// built-in regeneration distributions are).
MinorizationCheck check_minorization(const RegenDistribution& mu, const MinimalRegen& minimal,
                                     const std::vector<Vec>& grid);

struct ComputeLResult {
    double L = 0.0;
    bool at_zero = false;  // rate exceeds M already at arbitrarily small cubes
    bool capped = false;   // rate never exceeds M up to search_radius
};

// Half-width of the largest centered hypercube on which the rate stays <= M,
// by bisection of the max over a face grid (101 points per face axis, dims
// <= 3). Assumes the cube supremum of the rate is attained on faces.
ComputeLResult compute_L(const std::function<double(const Vec&)>& kappa, double M, int d,
                         double search_radius, double tol = 1e-6);

// Closed-form Brownian-motion bound on int_0^inf P0(T_M <= t) e^{-kf t} dt:
//   (2d/kf) (1 + 1/(L sqrt(2 kf))) exp(-sqrt(2 kf) L).
// Multiply by 4/E[tau] to bound the stationary L1 truncation error.
double bm_truncation_bound(double kappa_floor, double L_M, int d);

struct McBound {
    double bound = 0.0;  // 4 * integral_hat / mean_tau
    double se = 0.0;     // delta-method standard error of bound
    double integral_hat = 0.0;
    double mean_tau = 0.0;
    long n_capped_excess = 0;
    long n_capped_min = 0;
    long n_paths = 0;
};

// Monte Carlo estimate of the truncation bias bound
//   4 int_0^inf P(tau_excess <= t) e^{-kf t} dt / E[tau]
// via E[e^{-kf tau_excess}]/kf on split-lifetime paths; capped paths
// contribute the cap value, keeping the estimate on the conservative side.
McBound mc_truncation_bound(const Dynamics& dynamics,
                            const std::function<Vec(RngStream&)>& mu_sample,
                            const std::function<double(const Vec&)>& kappa, double M,
                            double kappa_floor, long n_paths, double T_cap, std::uint64_t seed,
                            int workers = 1);

struct ChooseMResult {
    double L_target = 0.0;
    double M = 0.0;
    bool degenerate = false;  // n <= 1 gives an empty cube
};

// Balance the truncation level against the intended number of draws:
// L_target = ln(n) / (2 sqrt(2 kf)), M = face-grid max of the rate on the
// hypercube of that half-width.
ChooseMResult choose_M(long n, double kappa_floor,
                       const std::function<double(const Vec&)>& kappa, int d,
                       double search_radius);

// One row of a truncation study. tv_estimate holds the empirical L1 distance
// between binned stationary densities (twice the total-variation distance),
// the quantity the bias bound controls. Both bounds are on the L1 scale:
// 4 * (clock integral) / mean_tau, with mean_tau the truncated-run tour mean.
struct TruncationReport {
    double M = 0.0;
    double L_M = 0.0;
    double bound_bm = 0.0;
    double bound_general = 0.0;
    double tv_estimate = 0.0;
    double mean_tau = 0.0;
};

}  // namespace restore
