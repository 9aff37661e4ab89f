#pragma once

#include <cstdint>
#include <vector>

#include "restore/analysis.hpp"
#include "restore/builtins.hpp"
#include "restore/estimators.hpp"
#include "restore/sampler.hpp"

namespace restore::experiments {

// Uniform bin grid on [lo, hi]; outside values are clamped into the edge bins.
struct BinGrid {
    double lo = 0.0;
    double hi = 1.0;
    int n = 1;
    int index(double x) const;
    double edge(int i) const;  // i in [0, n]
};

// Sum of |p_b - q_b| over bins (the L1 distance of binned densities; the
// total-variation distance is half of this).
double l1_distance(const std::vector<double>& p, const std::vector<double>& q);

// Time-weighted occupation histogram of a piecewise-constant trajectory,
// normalized by total time.
std::vector<double> occupation_histogram(const Trajectory& traj, const BinGrid& grid);

// Equal-weight histogram of 1-d draws, normalized by count.
std::vector<double> draw_histogram(const std::vector<Vec>& draws, const BinGrid& grid);

// Mixture-of-Gaussians reference masses per bin; tail mass beyond the grid is
// folded into the edge bins, matching the clamping convention above.
std::vector<double> gaussian_mixture_bin_masses(const std::vector<double>& weights,
                                                const std::vector<double>& means,
                                                const std::vector<double>& sds,
                                                const BinGrid& grid);

// Jump Restore on the two-scale Gaussian mixture with a unit-rate random walk
// Metropolis kernel (proposal sd 1) and C = 1, so kappa = mu/pi and the
// long-run regeneration fraction is C/(1+C) = 1/2.
TargetModel mixture_target();
RegenDistribution mixture_regen();
JumpRestoreSpec mixture_jump_spec();

struct MixtureJumpResult {
    Trajectory traj;
    double regen_fraction = 0.0;
    double tv = 0.0;  // half the L1 distance between histogram and reference
    std::vector<double> histogram;
    std::vector<double> expected;
    BinGrid grid;
    EstimateReport mean_report;  // time average of x
};
MixtureJumpResult run_mixture_jump(long steps, std::uint64_t seed, int workers,
                                   int n_bins = 100);

// Heavy-tailed multimodal 1-d posterior (three Cauchy likelihood terms, flat
// prior) sampled exactly: unstable OU dynamics dY = Y dt + dB, minimal
// regeneration distribution with the given floor, thinning bound from a wide
// grid scan of max(partial_rate, floor), and one exact draw per run.
struct CauchyCftpSetup {
    TargetModel target;
    DriftField drift;
    Dynamics dynamics;
    MinimalRegen minimal;
    double kappa_floor = 4.0;
    double M = 0.0;
};
CauchyCftpSetup make_cauchy_cftp_setup(double kappa_floor = 4.0);

struct CauchyCftpResult {
    std::vector<Vec> draws;
    double tv = 0.0;  // 50-bin histogram vs quadrature-normalized posterior
    std::vector<double> histogram;
    std::vector<double> expected;
    BinGrid grid;
    double C_star = 0.0;
    double M = 0.0;
    double kappa_floor = 4.0;
};
CauchyCftpResult run_cauchy_cftp(long n_draws, std::uint64_t seed, int workers, int n_bins = 50,
                                 double kappa_floor = 4.0);

// 1-d Gaussian truncation testbed: pi = mu = N(0,1) under Brownian dynamics
// with C = 1.5, giving kappa(x) = 1 + x^2/2 with floor 1 and closed-form
// L(M) = sqrt(2(M-1)).
struct GaussianTestbed {
    TargetModel target;
    RegenDistribution mu;
    DriftField drift;
    Dynamics dynamics;
    std::function<double(const Vec&)> kappa;
    double kappa_floor = 1.0;
    double C = 1.5;
};
GaussianTestbed gaussian_testbed(double C = 1.5);

// Per-bin regenerative accumulator for candidate-grid tours: Z_b,i is the
// tour's occupation estimate of bin b, giving p_hat = sum Z / sum tau and a
// delta-method standard error per bin.
struct RegenHistogram {
    BinGrid grid;
    std::vector<double> sum_z, sum_z2, sum_ztau;
    double sum_tau = 0.0;
    double sum_tau2 = 0.0;
    long n_tours = 0;
    long empty_tours = 0;

    explicit RegenHistogram(const BinGrid& g);
    void add_tour(double tau, const std::vector<Vec>& candidates);
    std::vector<double> p_hat() const;
    std::vector<double> standard_errors() const;
};

struct StudyLevel {
    double M = 0.0;
    std::vector<double> p;
    std::vector<double> se;
    long n_tours = 0;
    long empty_tours = 0;
};
StudyLevel run_truncation_level(const GaussianTestbed& bed, double M, double t_max,
                                const BinGrid& grid, std::uint64_t seed, int workers);

struct TruncateStudyResult {
    std::vector<TruncationReport> rows;  // one per level, in input order
    std::vector<double> mc_se;           // MC bound standard error per level
    std::vector<double> noise_allowance; // 3 * summed joint bin s.e. per level
    StudyLevel reference;
    double reference_M = 0.0;
    BinGrid grid;
};
// Shared-seed study: every level (and the reference) runs from the same
// master seed; distances are level-vs-reference L1 between binned densities.
TruncateStudyResult run_truncate_study(const GaussianTestbed& bed,
                                       const std::vector<double>& levels, double reference_M,
                                       double t_max, std::uint64_t seed, int workers,
                                       int n_bins = 100, double bin_lo = -5.0,
                                       double bin_hi = 5.0, long bound_paths = 20000,
                                       double bound_t_cap = 20.0);

}  // namespace restore::experiments
