#include "restore/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "restore/quadrature.hpp"
#include "restore/stats.hpp"

namespace restore::experiments {

int BinGrid::index(double x) const {
    if (x < lo) return 0;
    if (x >= hi) return n - 1;
    auto i = static_cast<int>((x - lo) / (hi - lo) * n);
    return std::clamp(i, 0, n - 1);
}

double BinGrid::edge(int i) const { return lo + (hi - lo) * static_cast<double>(i) / n; }

double l1_distance(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw ConfigError("l1_distance: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::fabs(p[i] - q[i]);
    return s;
}

std::vector<double> occupation_histogram(const Trajectory& traj, const BinGrid& grid) {
    if (traj.path_kind != PathKind::PiecewiseConstant)
        throw ConfigError("occupation_histogram: needs a piecewise-constant trajectory");
    std::vector<double> mass(static_cast<std::size_t>(grid.n), 0.0);
    for (std::size_t i = 0; i + 1 < traj.events.size(); ++i) {
        double dt = traj.events[i + 1].t - traj.events[i].t;
        if (dt <= 0.0) continue;
        mass[static_cast<std::size_t>(grid.index(traj.events[i].x[0]))] += dt;
    }
    if (traj.total_time > 0.0)
        for (double& m : mass) m /= traj.total_time;
    return mass;
}

std::vector<double> draw_histogram(const std::vector<Vec>& draws, const BinGrid& grid) {
    std::vector<double> mass(static_cast<std::size_t>(grid.n), 0.0);
    for (const Vec& x : draws) mass[static_cast<std::size_t>(grid.index(x[0]))] += 1.0;
    if (!draws.empty())
        for (double& m : mass) m /= static_cast<double>(draws.size());
    return mass;
}

std::vector<double> gaussian_mixture_bin_masses(const std::vector<double>& weights,
                                                const std::vector<double>& means,
                                                const std::vector<double>& sds,
                                                const BinGrid& grid) {
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    std::vector<double> mass(static_cast<std::size_t>(grid.n), 0.0);
    for (int b = 0; b < grid.n; ++b) {
        // edge bins absorb the tails, matching the index() clamp
        double a = b == 0 ? -std::numeric_limits<double>::infinity() : grid.edge(b);
        double c = b == grid.n - 1 ? std::numeric_limits<double>::infinity() : grid.edge(b + 1);
        double m = 0.0;
        for (std::size_t k = 0; k < weights.size(); ++k)
            m += weights[k] / wsum *
                 (stats::norm_cdf((c - means[k]) / sds[k]) -
                  stats::norm_cdf((a - means[k]) / sds[k]));
        mass[static_cast<std::size_t>(b)] = m;
    }
    return mass;
}

TargetModel mixture_target() {
    return gaussian_mixture_target({0.1, 0.3, 0.6}, {-22.0, -1.0, 15.0}, {3.0, 0.2, 1.0});
}

RegenDistribution mixture_regen() {
    return gaussian_mixture_regen({1.0, 1.0, 1.0}, {-29.0, 3.0, 10.0}, {0.3, 1.0, 1.0}, 1.0);
}

JumpRestoreSpec mixture_jump_spec() {
    TargetModel target = mixture_target();
    RegenDistribution mu = mixture_regen();
    JumpRestoreSpec spec;
    spec.dim = 1;
    spec.lambda = [](const Vec&) { return 1.0; };
    spec.kappa = [target, mu](const Vec& x) {
        return mu.C * std::exp(mu.log_density(x) - target.logp(x));
    };
    // Random walk Metropolis, proposal sd 1: a rejected proposal is a local
    // move that keeps the state. Fixed draw count (normal + one uniform).
    spec.kernel = [target](const Vec& x, RngStream& rng) {
        Vec y{x[0] + rng.normal()};
        double log_alpha = target.logp(y) - target.logp(x);
        double u = rng.uniform_pos();
        if (log_alpha >= 0.0 || std::log(u) < log_alpha) return y;
        return x;
    };
    spec.mu_sample = [mu](RngStream& rng) { return mu.sample(rng); };
    return spec;
}

MixtureJumpResult run_mixture_jump(long steps, std::uint64_t seed, int workers, int n_bins) {
    MixtureJumpResult out;
    StopRule stop;
    stop.max_steps = steps;
    out.traj = run_jump_restore(mixture_jump_spec(), std::nullopt, stop, seed, workers);
    out.regen_fraction = out.traj.steps > 0 ? static_cast<double>(out.traj.regen_count) /
                                                  static_cast<double>(out.traj.steps)
                                            : 0.0;
    out.grid = BinGrid{-35.0, 20.0, n_bins};
    out.histogram = occupation_histogram(out.traj, out.grid);
    out.expected = gaussian_mixture_bin_masses({0.1, 0.3, 0.6}, {-22.0, -1.0, 15.0},
                                               {3.0, 0.2, 1.0}, out.grid);
    out.tv = 0.5 * l1_distance(out.histogram, out.expected);
    out.mean_report = summarize(out.traj, [](const Vec& x) { return x[0]; });
    return out;
}

CauchyCftpSetup make_cauchy_cftp_setup(double kappa_floor) {
    CauchyCftpSetup s;
    s.target = cauchy_posterior_target({1.3, -11.6, 4.4});
    s.drift = DriftField::linear(1, 1.0);
    s.dynamics = Dynamics::ou(1, 1.0);
    s.kappa_floor = kappa_floor;
    Box box;
    box.lo = {-13.0};
    box.hi = {6.0};
    s.minimal = build_minimal_regen(s.target, s.drift, kappa_floor, box, 2001);
    // Thinning bound: the partial rate peaks near the isolated observation and
    // settles toward a finite tail limit, so a wide dense scan of
    // max(partial_rate, floor) plus unit headroom dominates it.
    double peak = 0.0;
    for (int i = 0; i <= 40000; ++i) {
        Vec x{-200.0 + 0.01 * i};
        peak = std::max(peak, kappa_star(s.target, s.drift, kappa_floor, x));
    }
    s.M = peak + 1.0;
    return s;
}

namespace {

// Quadrature bin masses for a 1-d unnormalized log-density; tails folded into
// the edge bins, the whole vector normalized to unit mass.
std::vector<double> quadrature_bin_masses(const TargetModel& target, const BinGrid& grid,
                                          double tail_extent) {
    auto f = [&target](double x) { return std::exp(target.logp(Vec{x})); };
    std::vector<double> mass(static_cast<std::size_t>(grid.n), 0.0);
    for (int b = 0; b < grid.n; ++b)
        mass[static_cast<std::size_t>(b)] = quad::simpson(f, grid.edge(b), grid.edge(b + 1), 401);
    mass.front() += quad::simpson(f, grid.lo - tail_extent, grid.lo, 40001);
    mass.back() += quad::simpson(f, grid.hi, grid.hi + tail_extent, 40001);
    double total = 0.0;
    for (double m : mass) total += m;
    if (!(total > 0.0)) throw EvaluationError("quadrature_bin_masses: zero total mass");
    for (double& m : mass) m /= total;
    return mass;
}

}  // namespace

CauchyCftpResult run_cauchy_cftp(long n_draws, std::uint64_t seed, int workers, int n_bins,
                                 double kappa_floor) {
    CauchyCftpSetup setup = make_cauchy_cftp_setup(kappa_floor);
    RegenDistribution mu = setup.minimal.as_regen();
    CftpConfig cfg;
    cfg.dynamics = setup.dynamics;
    {
        TargetModel t = setup.target;
        DriftField dr = setup.drift;
        double kf = setup.kappa_floor;
        cfg.kappa = [t, dr, kf](const Vec& x) { return kappa_star(t, dr, kf, x); };
    }
    cfg.mu_sample = mu.sample;
    cfg.kappa_floor = setup.kappa_floor;
    cfg.bound_M = setup.M;

    CauchyCftpResult out;
    out.kappa_floor = setup.kappa_floor;
    out.M = setup.M;
    out.C_star = setup.minimal.C_star;
    out.draws = run_cftp(cfg, n_draws, seed, workers);
    out.grid = BinGrid{-20.0, 12.0, n_bins};
    out.histogram = draw_histogram(out.draws, out.grid);
    out.expected = quadrature_bin_masses(setup.target, out.grid, 2000.0);
    out.tv = 0.5 * l1_distance(out.histogram, out.expected);
    return out;
}

GaussianTestbed gaussian_testbed(double C) {
    GaussianTestbed bed;
    bed.target = gaussian_target({0.0}, {1.0});
    bed.mu = gaussian_regen({0.0}, {1.0}, C);
    bed.drift = DriftField::zero(1);
    bed.dynamics = Dynamics::brownian(1);
    bed.C = C;
    bed.kappa_floor = C - 0.5;  // kappa(x) = (x^2 - 1)/2 + C attains its minimum at 0
    {
        TargetModel t = bed.target;
        RegenDistribution m = bed.mu;
        DriftField dr = bed.drift;
        bed.kappa = [t, m, dr](const Vec& x) { return regen_rate(t, m, dr, x); };
    }
    return bed;
}

RegenHistogram::RegenHistogram(const BinGrid& g)
    : grid(g),
      sum_z(static_cast<std::size_t>(g.n), 0.0),
      sum_z2(static_cast<std::size_t>(g.n), 0.0),
      sum_ztau(static_cast<std::size_t>(g.n), 0.0) {}

void RegenHistogram::add_tour(double tau, const std::vector<Vec>& candidates) {
    ++n_tours;
    sum_tau += tau;
    sum_tau2 += tau * tau;
    if (candidates.empty()) {
        ++empty_tours;
        return;
    }
    const double w = tau / static_cast<double>(candidates.size());
    // z_b = tau * (count in bin b) / k; accumulate z, z^2, z*tau per bin
    std::vector<double> z(static_cast<std::size_t>(grid.n), 0.0);
    for (const Vec& x : candidates) z[static_cast<std::size_t>(grid.index(x[0]))] += w;
    for (int b = 0; b < grid.n; ++b) {
        auto ub = static_cast<std::size_t>(b);
        if (z[ub] == 0.0) continue;
        sum_z[ub] += z[ub];
        sum_z2[ub] += z[ub] * z[ub];
        sum_ztau[ub] += z[ub] * tau;
    }
}

std::vector<double> RegenHistogram::p_hat() const {
    std::vector<double> p(static_cast<std::size_t>(grid.n), 0.0);
    if (sum_tau <= 0.0) return p;
    for (int b = 0; b < grid.n; ++b)
        p[static_cast<std::size_t>(b)] = sum_z[static_cast<std::size_t>(b)] / sum_tau;
    return p;
}

std::vector<double> RegenHistogram::standard_errors() const {
    std::vector<double> se(static_cast<std::size_t>(grid.n), 0.0);
    if (n_tours < 2 || sum_tau <= 0.0) return se;
    const auto n = static_cast<double>(n_tours);
    const double tbar = sum_tau / n;
    for (int b = 0; b < grid.n; ++b) {
        auto ub = static_cast<std::size_t>(b);
        double p = sum_z[ub] / sum_tau;
        double ss = sum_z2[ub] - 2.0 * p * sum_ztau[ub] + p * p * sum_tau2;
        double sigma2 = std::max(0.0, ss) / (n * tbar * tbar);
        se[ub] = std::sqrt(sigma2 / n);
    }
    return se;
}

StudyLevel run_truncation_level(const GaussianTestbed& bed, double M, double t_max,
                                const BinGrid& grid, std::uint64_t seed, int workers) {
    DiffusionRestoreSpec spec;
    spec.target = bed.target;
    spec.mu = bed.mu;
    spec.drift = bed.drift;
    spec.dynamics = bed.dynamics;
    spec.M = M;
    RegenHistogram acc(grid);
    run_diffusion_restore_stream(spec, std::nullopt, t_max, seed, workers,
                                 [&acc](const DiffusionTourView& view) {
                                     if (!view.complete) return;
                                     acc.add_tour(view.tau, *view.candidates);
                                 });
    StudyLevel lvl;
    lvl.M = M;
    lvl.p = acc.p_hat();
    lvl.se = acc.standard_errors();
    lvl.n_tours = acc.n_tours;
    lvl.empty_tours = acc.empty_tours;
    return lvl;
}

TruncateStudyResult run_truncate_study(const GaussianTestbed& bed,
                                       const std::vector<double>& levels, double reference_M,
                                       double t_max, std::uint64_t seed, int workers, int n_bins,
                                       double bin_lo, double bin_hi, long bound_paths,
                                       double bound_t_cap) {
    TruncateStudyResult out;
    out.grid = BinGrid{bin_lo, bin_hi, n_bins};
    out.reference_M = reference_M;
    out.reference = run_truncation_level(bed, reference_M, t_max, out.grid, seed, workers);
    for (std::size_t idx = 0; idx < levels.size(); ++idx) {
        const double M = levels[idx];
        StudyLevel lvl = run_truncation_level(bed, M, t_max, out.grid, seed, workers);
        ComputeLResult L = compute_L(bed.kappa, M, 1, 50.0);
        // separate stream family for the bound paths
        std::uint64_t bound_seed = seed ^ (0x9e3779b97f4a7c15ULL * (idx + 1));
        McBound mc = mc_truncation_bound(bed.dynamics, bed.mu.sample, bed.kappa, M,
                                         bed.kappa_floor, bound_paths, bound_t_cap, bound_seed,
                                         workers);
        TruncationReport row;
        row.M = M;
        row.L_M = L.L;
        row.bound_general = mc.bound;
        row.bound_bm = 4.0 * bm_truncation_bound(bed.kappa_floor, L.L, 1) / mc.mean_tau;
        row.tv_estimate = l1_distance(lvl.p, out.reference.p);
        row.mean_tau = mc.mean_tau;
        out.rows.push_back(row);
        out.mc_se.push_back(mc.se);
        double joint = 0.0;
        for (int b = 0; b < n_bins; ++b) {
            auto ub = static_cast<std::size_t>(b);
            joint += std::sqrt(lvl.se[ub] * lvl.se[ub] +
                               out.reference.se[ub] * out.reference.se[ub]);
        }
        out.noise_allowance.push_back(3.0 * joint);
    }
    return out;
}

}  // namespace restore::experiments
