#include "restore/clocks.hpp"

#include <cmath>
#include <limits>

namespace restore {

CompetingResult competing_exponentials(const std::vector<double>& rates, RngStream& rng) {
    double total = 0.0;
    for (double r : rates) {
        if (r < 0.0) throw DegenerateClockError("competing_exponentials: negative rate");
        total += r;
    }
    if (total <= 0.0)
        throw DegenerateClockError("competing_exponentials: all rates are zero");
    double t = rng.exponential(total);
    double u = rng.uniform() * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        if (rates[i] <= 0.0) continue;
        last_positive = i;
        acc += rates[i];
        if (u < acc) return {i, t};
    }
    return {last_positive, t};  // u landed on the rounding edge
}

FirstArrival thinned_first_arrival(const Dynamics& dynamics, const Vec& x0,
                                   const std::function<double(const Vec&)>& rate, double M,
                                   double horizon, RngStream& rng, bool trace_jumps) {
    if (!(M > 0.0)) throw DegenerateClockError("thinned_first_arrival: bound M must be positive");
    FirstArrival out;
    out.skeleton.times.push_back(0.0);
    out.skeleton.states.push_back(x0);
    Vec x = x0;
    double t = 0.0;
    std::vector<std::pair<double, Vec>> trace;
    for (;;) {
        double gap = rng.exponential(M);
        double t_next = t + gap;
        bool hits_horizon = t_next > horizon;
        double dt = (hits_horizon ? horizon : t_next) - t;
        trace.clear();
        x = dynamics.advance_traced(x, dt, rng, trace_jumps ? &trace : nullptr);
        for (auto& [off, state] : trace) {
            out.skeleton.times.push_back(t + off);
            out.skeleton.states.push_back(std::move(state));
        }
        t = hits_horizon ? horizon : t_next;
        out.skeleton.times.push_back(t);
        out.skeleton.states.push_back(x);
        if (hits_horizon) {
            out.arrived = false;
            out.time = horizon;
            out.state = x;
            return out;
        }
        ++out.n_candidates;
        double r = check_rate(rate(x), "thinned_first_arrival");
        if (r > M * (1.0 + 1e-12))
            throw BoundViolationError("thinned_first_arrival: rate " + std::to_string(r) +
                                      " exceeds bound " + std::to_string(M));
        if (rng.uniform() < r / M) {
            out.arrived = true;
            out.time = t;
            out.state = x;
            return out;
        }
    }
}

SplitLifetime split_lifetime(const Dynamics& dynamics, const Vec& x0,
                             const std::function<double(const Vec&)>& kappa, double M,
                             RngStream& rng, double T_cap, double delta_refine) {
    if (!(M > 0.0)) throw DegenerateClockError("split_lifetime: bound M must be positive");
    if (!(delta_refine > 0.0)) throw ConfigError("split_lifetime: delta_refine must be positive");
    SplitLifetime out;
    const double threshold = rng.exponential(1.0);  // Exp(1) budget for the excess integral

    Vec x = x0;
    double t = 0.0;
    double excess_int = 0.0;
    double excess_prev = std::max(check_rate(kappa(x), "split_lifetime") - M, 0.0);
    bool trunc_found = false, excess_found = false;

    auto note_excess_crossing = [&](double t_before, double seg_int, double dt) {
        // Linear interpolation of the accumulated integral inside the step.
        double need = threshold - excess_int;
        double frac = seg_int > 0.0 ? need / seg_int : 1.0;
        out.tau_excess = t_before + frac * dt;
        excess_found = true;
    };

    while ((!trunc_found || !excess_found) && t < T_cap) {
        // Next structural point: candidate arrival (only while the truncated
        // clock is still running), capped at T_cap.
        double gap = trunc_found ? std::numeric_limits<double>::infinity()
                                 : rng.exponential(M);
        bool is_candidate = t + gap <= T_cap && !trunc_found;
        double t_stop = is_candidate ? t + gap : T_cap;

        // Refine the segment so the excess integral sees the path at spacing
        // <= delta_refine.
        double seg = t_stop - t;
        long n_sub = std::max<long>(1, static_cast<long>(std::ceil(seg / delta_refine)));
        double h = seg / static_cast<double>(n_sub);
        for (long k = 0; k < n_sub; ++k) {
            x = dynamics.advance(x, h, rng);
            double kap = check_rate(kappa(x), "split_lifetime");
            double excess_cur = std::max(kap - M, 0.0);
            double seg_int = 0.5 * (excess_prev + excess_cur) * h;
            if (!excess_found && excess_int + seg_int >= threshold)
                note_excess_crossing(t, seg_int, h);
            excess_int += seg_int;
            excess_prev = excess_cur;
            t += h;
            if (trunc_found && excess_found) break;  // nothing left to resolve
        }
        if (trunc_found && excess_found) break;
        t = t_stop;  // absorb rounding drift from the subdivision

        if (is_candidate && !trunc_found) {
            double kap = check_rate(kappa(x), "split_lifetime");
            double truncated = std::min(kap, M);
            if (rng.uniform() < truncated / M) {
                out.tau_trunc = t;
                trunc_found = true;
            }
        }
    }

    if (!trunc_found) {
        out.tau_trunc = T_cap;
        out.trunc_capped = true;
    }
    if (!excess_found) {
        out.tau_excess = T_cap;
        out.excess_capped = true;
    }
    out.tau_min = std::min(out.tau_trunc, out.tau_excess);
    return out;
}

}  // namespace restore
