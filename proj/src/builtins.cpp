#include "restore/builtins.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace restore {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double log_normal_pdf(double x, double m, double s) {
    double z = (x - m) / s;
    return -0.5 * z * z - std::log(s) - 0.5 * kLog2Pi;
}

// Natural cubic spline through (x_i, y_i); second derivatives from the
// standard tridiagonal solve.
struct CubicSpline {
    std::vector<double> x, y, m;  // m: second derivatives at knots

    CubicSpline(std::vector<double> xs, std::vector<double> ys)
        : x(std::move(xs)), y(std::move(ys)) {
        const std::size_t n = x.size();
        if (n < 4) throw ConfigError("custom-grid target needs at least 4 knots");
        for (std::size_t i = 1; i < n; ++i)
            if (x[i] <= x[i - 1]) throw ConfigError("custom-grid knots must be increasing");
        m.assign(n, 0.0);
        std::vector<double> u(n, 0.0), z(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            double hi = x[i] - x[i - 1];
            double hj = x[i + 1] - x[i];
            double l = 2.0 * (x[i + 1] - x[i - 1]) - hi * u[i - 1];
            u[i] = hj / l;
            double rhs = 3.0 * ((y[i + 1] - y[i]) / hj - (y[i] - y[i - 1]) / hi);
            z[i] = (rhs - hi * z[i - 1]) / l;
        }
        for (std::size_t i = n - 1; i-- > 1;) m[i] = z[i] - u[i] * m[i + 1];
        for (auto& c : m) c *= 2.0;  // store f'' rather than the c-coefficient
    }

    std::size_t segment(double t) const {
        if (t < x.front() || t > x.back())
            throw EvaluationError("custom-grid target evaluated outside knot range");
        auto it = std::upper_bound(x.begin(), x.end(), t);
        std::size_t i = static_cast<std::size_t>(it - x.begin());
        if (i > 0) --i;
        if (i + 1 >= x.size()) i = x.size() - 2;
        return i;
    }

    double eval(double t) const {
        std::size_t i = segment(t);
        double h = x[i + 1] - x[i];
        double a = (x[i + 1] - t) / h, b = (t - x[i]) / h;
        return a * y[i] + b * y[i + 1] +
               ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0;
    }

    double deriv(double t) const {
        std::size_t i = segment(t);
        double h = x[i + 1] - x[i];
        double a = (x[i + 1] - t) / h, b = (t - x[i]) / h;
        return (y[i + 1] - y[i]) / h +
               h / 6.0 * ((3.0 * b * b - 1.0) * m[i + 1] - (3.0 * a * a - 1.0) * m[i]);
    }

    double deriv2(double t) const {
        std::size_t i = segment(t);
        double h = x[i + 1] - x[i];
        double a = (x[i + 1] - t) / h, b = (t - x[i]) / h;
        return a * m[i] + b * m[i + 1];
    }
};

struct Mixture {
    std::vector<double> w, mean, sd;

    double logp(double x) const {
        // log-sum-exp over components.
        double best = -std::numeric_limits<double>::infinity();
        std::vector<double> terms(w.size());
        for (std::size_t k = 0; k < w.size(); ++k) {
            terms[k] = std::log(w[k]) + log_normal_pdf(x, mean[k], sd[k]);
            best = std::max(best, terms[k]);
        }
        if (!std::isfinite(best)) return best;
        double s = 0.0;
        for (double t : terms) s += std::exp(t - best);
        return best + std::log(s);
    }

    // p, p' and p'' on linear scale relative to p (stable in the tails).
    void ratios(double x, double& r1, double& r2) const {
        double lp = logp(x);
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) {
            double t = (x - mean[k]) / (sd[k] * sd[k]);
            double rel = std::exp(std::log(w[k]) + log_normal_pdf(x, mean[k], sd[k]) - lp);
            s1 += rel * (-t);
            s2 += rel * (t * t - 1.0 / (sd[k] * sd[k]));
        }
        r1 = s1;  // p'/p
        r2 = s2;  // p''/p
    }
};

}  // namespace

TargetModel gaussian_target(const Vec& mean, const Vec& sd) {
    const int d = static_cast<int>(mean.size());
    for (double s : sd)
        if (!(s > 0.0)) throw ConfigError("gaussian target: sd must be positive");
    auto logp = [mean, sd](const Vec& x) {
        double v = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) v += log_normal_pdf(x[i], mean[i], sd[i]);
        return v;
    };
    auto grad = [mean, sd](const Vec& x) {
        Vec g(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = (x[i] - mean[i]) / (sd[i] * sd[i]);
        return g;
    };
    auto lap = [sd](const Vec&) {
        double v = 0.0;
        for (double s : sd) v += 1.0 / (s * s);
        return v;
    };
    return TargetModel::analytic(d, logp, grad, lap);
}

TargetModel gaussian_mixture_target(const std::vector<double>& weights,
                                    const std::vector<double>& means,
                                    const std::vector<double>& sds) {
    if (weights.empty() || weights.size() != means.size() || weights.size() != sds.size())
        throw ConfigError("gaussian mixture: weights/means/sds must have equal nonzero size");
    Mixture mix{weights, means, sds};
    double total = 0.0;
    for (double w : mix.w) {
        if (!(w > 0.0)) throw ConfigError("gaussian mixture: weights must be positive");
        total += w;
    }
    for (auto& w : mix.w) w /= total;
    for (double s : mix.sd)
        if (!(s > 0.0)) throw ConfigError("gaussian mixture: sds must be positive");
    auto logp = [mix](const Vec& x) { return mix.logp(x[0]); };
    // U = -log p: U' = -p'/p, U'' = -p''/p + (p'/p)^2.
    auto grad = [mix](const Vec& x) {
        double r1, r2;
        mix.ratios(x[0], r1, r2);
        return Vec{-r1};
    };
    auto lap = [mix](const Vec& x) {
        double r1, r2;
        mix.ratios(x[0], r1, r2);
        return -r2 + r1 * r1;
    };
    return TargetModel::analytic(1, logp, grad, lap);
}

TargetModel cauchy_posterior_target(const std::vector<double>& observations) {
    if (observations.empty()) throw ConfigError("cauchy posterior: needs observations");
    auto obs = observations;
    auto logp = [obs](const Vec& x) {
        double v = 0.0;
        for (double y : obs) {
            double t = x[0] - y;
            v -= std::log1p(t * t);
        }
        return v;
    };
    auto grad = [obs](const Vec& x) {
        double g = 0.0;
        for (double y : obs) {
            double t = x[0] - y;
            g += 2.0 * t / (1.0 + t * t);
        }
        return Vec{g};
    };
    auto lap = [obs](const Vec& x) {
        double l = 0.0;
        for (double y : obs) {
            double t = x[0] - y;
            double d = 1.0 + t * t;
            l += 2.0 * (1.0 - t * t) / (d * d);
        }
        return l;
    };
    return TargetModel::analytic(1, logp, grad, lap);
}

TargetModel custom_grid_target(const std::vector<double>& xs, const std::vector<double>& logps) {
    auto spline = std::make_shared<CubicSpline>(xs, logps);
    auto logp = [spline](const Vec& x) { return spline->eval(x[0]); };
    auto grad = [spline](const Vec& x) { return Vec{-spline->deriv(x[0])}; };
    auto lap = [spline](const Vec& x) { return -spline->deriv2(x[0]); };
    return TargetModel::analytic(1, logp, grad, lap);
}

RegenDistribution gaussian_regen(const Vec& mean, const Vec& sd, double C) {
    RegenDistribution mu;
    mu.dim = static_cast<int>(mean.size());
    mu.C = C;
    mu.log_density = [mean, sd](const Vec& x) {
        double v = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) v += log_normal_pdf(x[i], mean[i], sd[i]);
        return v;
    };
    mu.sample = [mean, sd](RngStream& rng) {
        Vec x(mean.size());
        for (std::size_t i = 0; i < mean.size(); ++i) x[i] = mean[i] + sd[i] * rng.normal();
        return x;
    };
    return mu;
}

RegenDistribution gaussian_mixture_regen(const std::vector<double>& weights,
                                         const std::vector<double>& means,
                                         const std::vector<double>& sds, double C) {
    [[maybe_unused]] TargetModel check = gaussian_mixture_target(weights, means, sds);
    Mixture mix{weights, means, sds};
    double total = 0.0;
    for (double w : mix.w) total += w;
    for (auto& w : mix.w) w /= total;
    RegenDistribution mu;
    mu.dim = 1;
    mu.C = C;
    mu.log_density = [mix](const Vec& x) { return mix.logp(x[0]); };
    mu.sample = [mix](RngStream& rng) {
        double u = rng.uniform();
        std::size_t k = 0;
        double acc = 0.0;
        for (; k + 1 < mix.w.size(); ++k) {
            acc += mix.w[k];
            if (u < acc) break;
        }
        return Vec{mix.mean[k] + mix.sd[k] * rng.normal()};
    };
    return mu;
}

}  // namespace restore
