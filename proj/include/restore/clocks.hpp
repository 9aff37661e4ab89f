#pragma once

#include <functional>
#include <vector>

#include "restore/common.hpp"
#include "restore/dynamics.hpp"
#include "restore/rng.hpp"

namespace restore {

struct CompetingResult {
    std::size_t index;  // which clock fired
    double time;
};

// First arrival among independent exponential clocks: one Exp(sum) holding
// time plus one categorical draw proportional to the rates. Zero-rate clocks
// never win; all rates zero is a DegenerateClockError.
CompetingResult competing_exponentials(const std::vector<double>& rates, RngStream& rng);

// Path observed at candidate times (plus traced internal jumps for jump
// dynamics). times[0] = 0 with the initial state.
struct Skeleton {
    std::vector<double> times;
    std::vector<Vec> states;
};

struct FirstArrival {
    bool arrived = false;  // false: horizon reached first
    double time = 0.0;     // arrival time, or the horizon
    Vec state;             // state at arrival (pre-jump) or at the horizon
    Skeleton skeleton;
    long n_candidates = 0;
};

// First arrival of an inhomogeneous-along-the-path rate via Poisson thinning:
// candidates arrive at rate M; a candidate at state x is accepted with
// probability rate(x)/M. rate(x) > M (beyond rounding) at any candidate is a
// BoundViolationError. With trace_jumps set, internal moves of jump dynamics
// are recorded in the skeleton so piecewise-constant paths are reconstructed
// exactly.
FirstArrival thinned_first_arrival(const Dynamics& dynamics, const Vec& x0,
                                   const std::function<double(const Vec&)>& rate, double M,
                                   double horizon, RngStream& rng, bool trace_jumps = false);

struct SplitLifetime {
    double tau_trunc = 0.0;    // first arrival of the truncated rate min(kappa, M)
    bool trunc_capped = false; // no arrival by T_cap; tau_trunc = T_cap
    double tau_excess = 0.0;   // first arrival of the excess rate (kappa - M)^+
    bool excess_capped = false;
    double tau_min = 0.0;      // min of the two: the full-rate lifetime
};

// Jointly simulates, on one path of the local dynamics, the first arrival of
// the truncated rate min(kappa, M) (by thinning with bound M) and of the
// excess rate (kappa - M)^+ (by integrating the excess along the path against
// an independent Exp(1) threshold). The path is refined to spacing at most
// delta_refine and the excess integral accumulated by the trapezoid rule, so
// the excess arrival carries an O(delta_refine^2) discretization error.
SplitLifetime split_lifetime(const Dynamics& dynamics, const Vec& x0,
                             const std::function<double(const Vec&)>& kappa, double M,
                             RngStream& rng, double T_cap, double delta_refine = 0.01);

}  // namespace restore
