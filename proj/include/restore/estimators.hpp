#pragma once

#include <functional>
#include <vector>

#include "restore/sampler.hpp"

namespace restore {

// Per-tour lifetimes and path integrals of one integrand. Tours run from one
// regeneration to the next; the opening segment (possibly x0-started) is
// excluded unless requested, the cut-off final segment always.
struct TourStats {
    std::vector<double> z;    // Z_i = integral of f over tour i
    std::vector<double> tau;  // tour lifetimes
    long excluded_first = 0;
    long excluded_partial = 0;
    long empty_candidate_tours = 0;  // candidate-grid tours with no candidates (Z_i = 0)
    long n_tours() const { return static_cast<long>(z.size()); }
};

// Integrate f over each complete tour. Piecewise-constant paths integrate
// exactly (the state holds between events); candidate-grid paths use
// (tau_i / k_i) * sum of f at the tour's k_i candidate states, unbiased
// because homogeneous Poisson candidate times are conditionally uniform.
// Throws InsufficientData when no tour survives the exclusions.
TourStats tour_integrals(const Trajectory& traj, const std::function<double(const Vec&)>& f,
                         bool include_first = false);

// Ratio estimate sum Z_i / sum tau_i.
double estimate(const TourStats& stats);

// Regenerative asymptotic variance: sum (Z_i - est * tau_i)^2 / (n * tau_bar^2).
// Needs at least two tours.
double sigma2_hat(const TourStats& stats);

// Effective sample size n * var_pi_f / sigma2_hat; +infinity when the
// variance estimate is exactly zero (constant integrand).
double n_eff(const TourStats& stats, double var_pi_f);

// Plug-in estimate of Var_pi(f): time-weighted second central moment of f
// over the trajectory's complete tours.
double variance_under_pi(const Trajectory& traj, const std::function<double(const Vec&)>& f,
                         bool include_first = false);

struct ConfidenceInterval {
    double low = 0.0;
    double high = 0.0;
    bool small_sample = false;  // fewer than 30 tours: normal approximation suspect
};

// estimate +- z_level * sqrt(sigma2_hat / n). Returned even for small n, with
// the small_sample flag raised instead of an error.
ConfidenceInterval confidence_interval(const TourStats& stats, double level = 0.95);

struct EstimateReport {
    double estimate = 0.0;
    double sigma2_hat = 0.0;
    double n_eff = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double level = 0.95;
    long n_tours = 0;
    long excluded_tours = 0;
    long empty_candidate_tours = 0;
    double total_time = 0.0;
    bool small_sample = false;
};

// One-call summary: tour integrals, point estimate, variance, plug-in n_eff
// and confidence interval for a single integrand.
EstimateReport summarize(const Trajectory& traj, const std::function<double(const Vec&)>& f,
                         double level = 0.95, bool include_first = false);

}  // namespace restore
