#include "restore/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "restore/clocks.hpp"
#include "restore/parallel.hpp"

namespace restore {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Visit the full tensor grid (n points per axis) of a box; d <= 3.
template <typename Body>
void for_grid(const Box& box, int n, Body&& body) {
    const int d = box.dim();
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    Vec x(static_cast<std::size_t>(d));
    std::vector<double> h(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a)
        h[static_cast<std::size_t>(a)] =
            (box.hi[static_cast<std::size_t>(a)] - box.lo[static_cast<std::size_t>(a)]) /
            static_cast<double>(n - 1);
    for (;;) {
        bool on_face = false;
        for (int a = 0; a < d; ++a) {
            auto ua = static_cast<std::size_t>(a);
            x[ua] = box.lo[ua] + h[ua] * idx[ua];
            if (idx[ua] == 0 || idx[ua] == n - 1) on_face = true;
        }
        body(x, on_face);
        int a = 0;
        while (a < d && ++idx[static_cast<std::size_t>(a)] == n) {
            idx[static_cast<std::size_t>(a)] = 0;
            ++a;
        }
        if (a == d) break;
    }
}

}  // namespace

double kappa_star(const TargetModel& target, const DriftField& drift, double kappa_floor,
                  const Vec& x) {
    return std::max(partial_rate_diffusion(target, drift, x), kappa_floor);
}

double MinimalRegen::log_density(const Vec& x) const {
    double lg = log_mu_star_unnorm(x);
    return lg == kNegInf ? kNegInf : lg - log_I;
}

RegenDistribution MinimalRegen::as_regen() const {
    RegenDistribution out;
    out.dim = dim;
    out.C = C_star;
    MinimalRegen self = *this;
    out.log_density = [self](const Vec& x) { return self.log_density(x); };
    const double log_height = std::log(envelope_height);
    out.sample = [self, log_height](RngStream& rng) {
        const int d = self.envelope_box.dim();
        Vec x(static_cast<std::size_t>(d));
        for (long tries = 0; tries < 100000000; ++tries) {
            for (int a = 0; a < d; ++a) {
                auto ua = static_cast<std::size_t>(a);
                x[ua] = self.envelope_box.lo[ua] +
                        rng.uniform() * (self.envelope_box.hi[ua] - self.envelope_box.lo[ua]);
            }
            double lg = self.log_mu_star_unnorm(x);
            if (lg == kNegInf) continue;
            if (std::log(rng.uniform_pos()) + log_height < lg) return x;
        }
        throw ExplosionSuspected("minimal regen sampler: rejection cap exceeded");
    };
    return out;
}

MinimalRegen build_minimal_regen(const TargetModel& target, const DriftField& drift,
                                 double kappa_floor, const Box& envelope_box, int n_grid) {
    const int d = envelope_box.dim();
    if (d != target.dim) throw ConfigError("build_minimal_regen: box/target dimension mismatch");
    if (d > 3) throw ConfigError("build_minimal_regen: tensor quadrature supports dim <= 3");
    if (n_grid < 3) throw ConfigError("build_minimal_regen: n_grid must be at least 3");

    MinimalRegen out;
    out.dim = d;
    out.kappa_floor = kappa_floor;
    out.envelope_box = envelope_box;
    out.log_mu_star_unnorm = [target, drift, kappa_floor](const Vec& x) {
        double excess = kappa_floor - partial_rate_diffusion(target, drift, x);
        if (excess <= 0.0) return kNegInf;
        return std::log(excess) + target.logp(x);
    };

    auto unnorm = [&out](const Vec& x) {
        double lg = out.log_mu_star_unnorm(x);
        return lg == kNegInf ? 0.0 : std::exp(lg);
    };

    double gmax = 0.0;
    double face_max = 0.0;
    for_grid(envelope_box, n_grid, [&](const Vec& x, bool on_face) {
        double g = unnorm(x);
        gmax = std::max(gmax, g);
        if (on_face) face_max = std::max(face_max, g);
    });
    if (gmax <= 0.0)
        throw FloorTooLow("build_minimal_regen: floor at or below the partial rate everywhere");
    if (face_max > 1e-12 * std::max(1.0, gmax))
        throw BoxTooSmall("build_minimal_regen: density does not vanish on the box faces");

    const double integral = quad::simpson_box(unnorm, envelope_box, n_grid);
    if (!(integral > 0.0)) throw FloorTooLow("build_minimal_regen: zero mass on the box");
    const double z_pi = quad::integrate_logdensity(
        [&target](const Vec& x) { return target.logp(x); }, envelope_box, n_grid);
    out.log_I = std::log(integral);
    out.log_Z_pi = std::log(z_pi);
    out.C_star = integral / z_pi;
    out.envelope_height = gmax * 1.01;
    return out;
}

MinorizationCheck check_minorization(const RegenDistribution& mu, const MinimalRegen& minimal,
                                     const std::vector<Vec>& grid) {
    MinorizationCheck out;
    double eps = std::numeric_limits<double>::infinity();
    long support_points = 0;
    for (const Vec& x : grid) {
        double lg = minimal.log_mu_star_unnorm(x);
        if (lg == kNegInf) continue;
        ++support_points;
        double log_ratio = std::log(mu.C) + mu.log_density(x) -
                           (std::log(minimal.C_star) + lg - minimal.log_I);
        eps = std::min(eps, std::exp(log_ratio));
    }
    if (support_points == 0)
        throw InsufficientData("check_minorization: grid misses the support of mu*");
    out.epsilon = eps;
    out.ok = eps >= 1.0 - 1e-9;
    out.c_ok = mu.C >= minimal.C_star - 1e-9 * std::max(1.0, minimal.C_star);
    return out;
}

namespace {

// Max of the rate over a grid on the faces of [-ell, ell]^d (101 points per
// face axis). Heuristic: assumes the cube supremum is attained on faces.
double face_grid_max(const std::function<double(const Vec&)>& kappa, double ell, int d,
                     int n_per_axis = 101) {
    double best = kNegInf;
    Vec x(static_cast<std::size_t>(d), 0.0);
    if (d == 1) {
        for (double s : {-ell, ell}) {
            x[0] = s;
            best = std::max(best, kappa(x));
        }
        return best;
    }
    // walk each face's (d-1)-dim grid
    std::vector<int> idx(static_cast<std::size_t>(d - 1));
    const double h = 2.0 * ell / static_cast<double>(n_per_axis - 1);
    for (int axis = 0; axis < d; ++axis) {
        for (double s : {-ell, ell}) {
            std::fill(idx.begin(), idx.end(), 0);
            for (;;) {
                int j = 0;
                for (int a = 0; a < d; ++a) {
                    if (a == axis) {
                        x[static_cast<std::size_t>(a)] = s;
                    } else {
                        x[static_cast<std::size_t>(a)] =
                            -ell + h * idx[static_cast<std::size_t>(j)];
                        ++j;
                    }
                }
                best = std::max(best, kappa(x));
                int a = 0;
                while (a < d - 1 && ++idx[static_cast<std::size_t>(a)] == n_per_axis) {
                    idx[static_cast<std::size_t>(a)] = 0;
                    ++a;
                }
                if (a == d - 1) break;
            }
        }
    }
    return best;
}

}  // namespace

ComputeLResult compute_L(const std::function<double(const Vec&)>& kappa, double M, int d,
                         double search_radius, double tol) {
    if (d < 1 || d > 3) throw ConfigError("compute_L: dim must be 1, 2 or 3");
    if (!(search_radius > 0.0) || !(tol > 0.0))
        throw ConfigError("compute_L: search_radius and tol must be positive");
    ComputeLResult out;
    auto fits = [&](double ell) { return face_grid_max(kappa, ell, d) <= M; };
    if (!fits(std::min(tol, search_radius))) {
        out.at_zero = true;
        return out;
    }
    if (fits(search_radius)) {
        out.L = search_radius;
        out.capped = true;
        return out;
    }
    double lo = std::min(tol, search_radius);
    double hi = search_radius;
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        (fits(mid) ? lo : hi) = mid;
    }
    out.L = lo;
    return out;
}

double bm_truncation_bound(double kappa_floor, double L_M, int d) {
    if (!(kappa_floor > 0.0)) throw ConfigError("bm_truncation_bound: kappa_floor must be > 0");
    if (!(L_M > 0.0)) throw ConfigError("bm_truncation_bound: L_M must be > 0");
    const double s = std::sqrt(2.0 * kappa_floor);
    return (2.0 * d / kappa_floor) * (1.0 + 1.0 / (L_M * s)) * std::exp(-s * L_M);
}

McBound mc_truncation_bound(const Dynamics& dynamics,
                            const std::function<Vec(RngStream&)>& mu_sample,
                            const std::function<double(const Vec&)>& kappa, double M,
                            double kappa_floor, long n_paths, double T_cap, std::uint64_t seed,
                            int workers) {
    if (!(kappa_floor > 0.0)) throw ConfigError("mc_truncation_bound: kappa_floor must be > 0");
    if (n_paths < 2) throw InsufficientData("mc_truncation_bound: need at least two paths");
    const auto n = static_cast<std::size_t>(n_paths);
    std::vector<double> damp(n);  // exp(-kf * tau_excess)
    std::vector<double> tau(n);   // tau_min
    std::vector<unsigned char> cap_e(n, 0), cap_m(n, 0);
    parallel_for(n, workers, [&](std::size_t i) {
        RngStream rng(seed, i);
        Vec x0 = mu_sample(rng);
        SplitLifetime sl = split_lifetime(dynamics, x0, kappa, M, rng, T_cap);
        damp[i] = std::exp(-kappa_floor * sl.tau_excess);
        tau[i] = sl.tau_min;
        cap_e[i] = sl.excess_capped ? 1 : 0;
        cap_m[i] = sl.trunc_capped && sl.excess_capped ? 1 : 0;
    });
    double su = 0.0, sv = 0.0;
    McBound out;
    out.n_paths = n_paths;
    for (std::size_t i = 0; i < n; ++i) {
        su += damp[i];
        sv += tau[i];
        out.n_capped_excess += cap_e[i];
        out.n_capped_min += cap_m[i];
    }
    const double ubar = su / static_cast<double>(n_paths);
    const double vbar = sv / static_cast<double>(n_paths);
    double suu = 0.0, svv = 0.0, suv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double du = damp[i] - ubar;
        double dv = tau[i] - vbar;
        suu += du * du;
        svv += dv * dv;
        suv += du * dv;
    }
    const double denom = static_cast<double>(n_paths - 1);
    suu /= denom;
    svv /= denom;
    suv /= denom;
    out.integral_hat = ubar / kappa_floor;
    out.mean_tau = vbar;
    out.bound = 4.0 * ubar / (kappa_floor * vbar);
    const double r = ubar / vbar;
    double var_r = (suu - 2.0 * r * suv + r * r * svv) / (vbar * vbar * n_paths);
    out.se = 4.0 / kappa_floor * std::sqrt(std::max(0.0, var_r));
    return out;
}

ChooseMResult choose_M(long n, double kappa_floor,
                       const std::function<double(const Vec&)>& kappa, int d,
                       double search_radius) {
    if (!(kappa_floor > 0.0)) throw ConfigError("choose_M: kappa_floor must be > 0");
    if (n < 1) throw ConfigError("choose_M: n must be at least 1");
    ChooseMResult out;
    out.L_target = std::log(static_cast<double>(n)) / (2.0 * std::sqrt(2.0 * kappa_floor));
    if (out.L_target <= 0.0) {
        out.degenerate = true;
        out.M = kappa(Vec(static_cast<std::size_t>(d), 0.0));
        return out;
    }
    out.L_target = std::min(out.L_target, search_radius);
    out.M = face_grid_max(kappa, out.L_target, d);
    return out;
}

}  // namespace restore
