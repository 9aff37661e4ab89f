#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "restore/clocks.hpp"
#include "restore/dynamics.hpp"
#include "restore/model.hpp"
#include "restore/rng.hpp"

namespace restore {

enum class EventKind { Initial, LocalMove, Regeneration, FinalState };

struct Event {
    double t = 0.0;
    EventKind kind = EventKind::Initial;
    Vec x;
};

// How path integrals against the trajectory are formed: jump and constant
// paths are piecewise constant between events (integrals are exact); diffusion
// paths are observed on the Poisson candidate grid and integrated by the
// tour-length-weighted candidate average.
enum class PathKind { PiecewiseConstant, CandidateGrid };

struct Trajectory {
    int dim = 1;
    double total_time = 0.0;
    long regen_count = 0;
    long steps = 0;  // local moves + regenerations
    PathKind path_kind = PathKind::PiecewiseConstant;
    bool exact_dynamics = true;
    std::vector<Event> events;
};

// Stop as soon as either budget is exhausted; at least one must be finite.
struct StopRule {
    double t_max = std::numeric_limits<double>::infinity();
    long max_steps = std::numeric_limits<long>::max();
};

// General jump-process sampler input. kappa must be everywhere nonnegative;
// lambda is the local move rate; kernel draws the local move (which may keep
// the state, e.g. a rejected Metropolis proposal).
struct JumpRestoreSpec {
    int dim = 1;
    std::function<Vec(const Vec&, RngStream&)> kernel;
    std::function<double(const Vec&)> lambda;
    std::function<double(const Vec&)> kappa;
    std::function<Vec(RngStream&)> mu_sample;
    long event_cap = 100000000;
};

// Simulate the regeneration-enriched jump process: from state x the local
// clock Exp(lambda(x)) competes with the regeneration clock Exp(kappa(x));
// the winner either moves x through the kernel or replaces it by a fresh draw
// from mu. Tours are generated on independent streams derived from `seed`
// (one per tour), so the result does not depend on `workers`.
Trajectory run_jump_restore(const JumpRestoreSpec& spec, const std::optional<Vec>& x0,
                            const StopRule& stop, std::uint64_t seed, int workers = 1);

// Embedding of a DiscreteModel as a jump spec over 1-d index points:
// lambda(i) = -Q[i][i], kernel draws from the off-diagonal row, kappa from
// regen_rates_discrete, mu_sample categorical.
JumpRestoreSpec discrete_jump_spec(const DiscreteModel& model);

// Finite-state version driven by a DiscreteModel (states are point indices).
Trajectory run_jump_restore(const DiscreteModel& model, int x0, const StopRule& stop,
                            std::uint64_t seed, int workers = 1);

// Accumulated summary of a long discrete run: total occupation time per state
// plus per-tour moment sums for the regenerative covariance of the occupation
// fractions. Tour moments cover complete mu-started tours only (the initial
// tour from x0 and the final cut tour are excluded).
struct OccupationStats {
    Eigen::VectorXd time_per_state;
    double total_time = 0.0;
    long regen_count = 0;
    long events = 0;
    long n_tours = 0;           // complete mu-started tours
    Eigen::VectorXd sum_z;      // per-tour occupation vectors
    Eigen::MatrixXd sum_zz;
    Eigen::VectorXd sum_ztau;
    double sum_tau = 0.0;
    double sum_tau2 = 0.0;
};

// Streaming occupation run for long discrete trajectories: same process as
// run_jump_restore(DiscreteModel, ...) but accumulating OccupationStats
// instead of storing events, so t_max can be large.
OccupationStats run_discrete_occupation(const DiscreteModel& model, int x0, double t_max,
                                        std::uint64_t seed, long event_cap = 2000000000);

// Diffusion-based sampler input. The regeneration rate is
// kappa(x) = partial_rate_diffusion(target, drift, x) + C mubar(x)/pibar(x),
// truncated at the thinning bound M during simulation. `drift` must describe
// the same drift the dynamics realize.
struct DiffusionRestoreSpec {
    TargetModel target;
    RegenDistribution mu;
    DriftField drift;
    Dynamics dynamics;
    double M = 1.0;
    long event_cap = 100000000;
};

// Regeneration rate truncated at M, as used by run_diffusion_restore.
double truncated_regen_rate(const DiffusionRestoreSpec& spec, const Vec& x);

// Simulate the diffusion Restore process by thinning each tour at bound M.
// Candidate states (accepted and rejected) are recorded as LocalMove events;
// each Regeneration event carries the fresh draw that opens the next tour.
// When x0 is empty the run starts from a mu draw.
Trajectory run_diffusion_restore(const DiffusionRestoreSpec& spec, const std::optional<Vec>& x0,
                                 double t_max, std::uint64_t seed, int workers = 1);

// One tour of the diffusion run, delivered in order to a consumer: lifetime
// tau, the candidate states observed on the tour, whether the tour closed
// with a regeneration (the final tour is cut by t_max), and the tour start.
struct DiffusionTourView {
    double tau = 0.0;
    bool complete = false;
    const Vec* start = nullptr;
    const std::vector<Vec>* candidates = nullptr;
};
void run_diffusion_restore_stream(const DiffusionRestoreSpec& spec,
                                  const std::optional<Vec>& x0, double t_max,
                                  std::uint64_t seed, int workers,
                                  const std::function<void(const DiffusionTourView&)>& on_tour);

// Exact sampling configuration: kappa must satisfy
// kappa_floor <= kappa(x) <= bound_M along the simulated path (checked at
// every evaluation; violations raise AssumptionViolation / BoundViolationError).
struct CftpConfig {
    Dynamics dynamics;
    std::function<double(const Vec&)> kappa;
    std::function<Vec(RngStream&)> mu_sample;
    double kappa_floor = 0.0;
    double bound_M = 0.0;
};

// One perfect draw from the invariant law: run the dominated construction for
// an Exp(kappa_floor) window from a fresh mu draw, regenerating at excess
// rate kappa - kappa_floor (thinned at bound_M - kappa_floor), and return the
// state at the end of the window.
Vec run_cftp_draw(const CftpConfig& cfg, RngStream& rng);

// n independent draws, one stream per draw, parallelised over `workers`.
std::vector<Vec> run_cftp(const CftpConfig& cfg, long n_draws, std::uint64_t seed,
                          int workers = 1);

struct RejectionDraw {
    Vec x;
    long n_proposals = 0;
};

// Classical rejection sampling as the degenerate exact sampler (constant
// dynamics, kappa = C mubar / pibar, floor C/M). Decision protocol, shared
// with any directly coded sampler for trace comparison: per proposal draw
// X = mu.sample(rng) and one uniform u = rng.uniform(), accept iff
// u < exp(target.logp(X) - mu.log_density(X) - log(M)). A log-ratio above
// zero (beyond rounding) is an EnvelopeError.
RejectionDraw run_rejection_equivalence(const TargetModel& target, const RegenDistribution& mu,
                                        double M, RngStream& rng);

}  // namespace restore
