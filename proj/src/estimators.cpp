#include "restore/estimators.hpp"

#include <cmath>
#include <limits>

#include "restore/stats.hpp"

namespace restore {

namespace {

struct TourSpan {
    std::size_t begin;  // index of the opening event (Initial or Regeneration)
    std::size_t end;    // index of the closing Regeneration event
};

// Complete tours only: each span opens at Initial/Regeneration and closes at
// the next Regeneration. The tail after the last regeneration is dropped.
std::vector<TourSpan> complete_tours(const Trajectory& traj) {
    std::vector<TourSpan> spans;
    std::size_t open = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < traj.events.size(); ++i) {
        EventKind k = traj.events[i].kind;
        if (k == EventKind::Initial) {
            open = i;
        } else if (k == EventKind::Regeneration) {
            spans.push_back(TourSpan{open, i});
            open = i;
        }
    }
    return spans;
}

}  // namespace

TourStats tour_integrals(const Trajectory& traj, const std::function<double(const Vec&)>& f,
                         bool include_first) {
    TourStats stats;
    auto spans = complete_tours(traj);
    stats.excluded_partial = traj.events.empty() ? 0 : 1;
    std::size_t first = 0;
    if (!include_first && !spans.empty()) {
        first = 1;
        stats.excluded_first = 1;
    }
    if (spans.size() <= first)
        throw InsufficientData("tour_integrals: no complete tours after exclusions");
    stats.z.reserve(spans.size() - first);
    stats.tau.reserve(spans.size() - first);
    for (std::size_t s = first; s < spans.size(); ++s) {
        const auto& span = spans[s];
        double t0 = traj.events[span.begin].t;
        double t1 = traj.events[span.end].t;
        double tau = t1 - t0;
        double z = 0.0;
        if (traj.path_kind == PathKind::PiecewiseConstant) {
            for (std::size_t i = span.begin; i < span.end; ++i)
                z += f(traj.events[i].x) * (traj.events[i + 1].t - traj.events[i].t);
        } else {
            long k = 0;
            double acc = 0.0;
            for (std::size_t i = span.begin + 1; i < span.end; ++i) {
                if (traj.events[i].kind != EventKind::LocalMove) continue;
                acc += f(traj.events[i].x);
                ++k;
            }
            if (k == 0)
                ++stats.empty_candidate_tours;
            else
                z = tau * acc / static_cast<double>(k);
        }
        stats.z.push_back(z);
        stats.tau.push_back(tau);
    }
    return stats;
}

double estimate(const TourStats& stats) {
    if (stats.n_tours() < 1) throw InsufficientData("estimate: no tours");
    double sz = 0.0, st = 0.0;
    for (std::size_t i = 0; i < stats.z.size(); ++i) {
        sz += stats.z[i];
        st += stats.tau[i];
    }
    if (st <= 0.0) throw InsufficientData("estimate: total tour time is zero");
    return sz / st;
}

double sigma2_hat(const TourStats& stats) {
    const long n = stats.n_tours();
    if (n < 2) throw InsufficientData("sigma2_hat: need at least two tours");
    const double fbar = estimate(stats);
    double st = 0.0;
    for (double t : stats.tau) st += t;
    const double tbar = st / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < stats.z.size(); ++i) {
        double r = stats.z[i] - fbar * stats.tau[i];
        ss += r * r;
    }
    return ss / (static_cast<double>(n) * tbar * tbar);
}

double n_eff(const TourStats& stats, double var_pi_f) {
    const double s2 = sigma2_hat(stats);
    if (s2 == 0.0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(stats.n_tours()) * var_pi_f / s2;
}

double variance_under_pi(const Trajectory& traj, const std::function<double(const Vec&)>& f,
                         bool include_first) {
    TourStats sf = tour_integrals(traj, f, include_first);
    TourStats sf2 = tour_integrals(
        traj,
        [&f](const Vec& x) {
            double v = f(x);
            return v * v;
        },
        include_first);
    double m1 = estimate(sf);
    double m2 = estimate(sf2);
    double v = m2 - m1 * m1;
    return v > 0.0 ? v : 0.0;
}

ConfidenceInterval confidence_interval(const TourStats& stats, double level) {
    if (!(level > 0.0 && level < 1.0))
        throw ConfigError("confidence_interval: level must lie in (0, 1)");
    const double est = estimate(stats);
    const double s2 = sigma2_hat(stats);
    const double z = stats::norm_ppf(0.5 * (1.0 + level));
    const double half = z * std::sqrt(s2 / static_cast<double>(stats.n_tours()));
    ConfidenceInterval ci;
    ci.low = est - half;
    ci.high = est + half;
    ci.small_sample = stats.n_tours() < 30;
    return ci;
}

EstimateReport summarize(const Trajectory& traj, const std::function<double(const Vec&)>& f,
                         double level, bool include_first) {
    TourStats stats = tour_integrals(traj, f, include_first);
    EstimateReport rep;
    rep.estimate = estimate(stats);
    rep.sigma2_hat = sigma2_hat(stats);
    rep.n_eff = n_eff(stats, variance_under_pi(traj, f, include_first));
    ConfidenceInterval ci = confidence_interval(stats, level);
    rep.ci_low = ci.low;
    rep.ci_high = ci.high;
    rep.level = level;
    rep.n_tours = stats.n_tours();
    rep.excluded_tours = stats.excluded_first + stats.excluded_partial;
    rep.empty_candidate_tours = stats.empty_candidate_tours;
    rep.total_time = traj.total_time;
    rep.small_sample = ci.small_sample;
    return rep;
}

}  // namespace restore
