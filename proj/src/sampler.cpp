#include "restore/sampler.hpp"

#include <cmath>
#include <limits>

#include "restore/parallel.hpp"

namespace restore {

namespace {

// One simulated tour, times relative to the tour start. The closing
// regeneration's fresh state belongs to the NEXT tour (drawn on that tour's
// own stream), which is what keeps tours independent across streams.
struct SimTour {
    Vec start;
    std::vector<std::pair<double, Vec>> moves;
    double tau = 0.0;   // closing regeneration time, valid when ended
    bool ended = false; // false: hit the horizon or step cap without regenerating
};

SimTour simulate_jump_tour(const JumpRestoreSpec& spec, Vec start, double horizon, long step_cap,
                           RngStream& rng) {
    SimTour tour;
    tour.start = std::move(start);
    Vec x = tour.start;
    double t = 0.0;
    long steps = 0;
    for (;;) {
        double lam = spec.lambda(x);
        if (lam < 0.0) throw DegenerateClockError("run_jump_restore: negative local rate");
        double kap = check_rate(spec.kappa(x), "run_jump_restore");
        double total = lam + kap;
        if (total <= 0.0)
            throw DegenerateClockError("run_jump_restore: state absorbing (both rates zero)");
        t += rng.exponential(total);
        if (t > horizon) return tour;
        // Clock ties have probability zero; the categorical edge goes to the
        // local move.
        bool regenerate = rng.uniform() * total < kap;
        if (regenerate) {
            tour.tau = t;
            tour.ended = true;
            return tour;
        }
        x = spec.kernel(x, rng);
        tour.moves.emplace_back(t, x);
        if (++steps >= step_cap) return tour;
        if (static_cast<long>(tour.moves.size()) >= spec.event_cap)
            throw ExplosionSuspected("run_jump_restore: one tour exceeded the event cap");
    }
}

// Generate tours 0, 1, 2, ... on streams (seed, index), simulated in parallel
// batches but consumed strictly in index order; consume returns false to stop.
void generate_tours(const std::optional<Vec>& x0,
                    const std::function<Vec(RngStream&)>& mu_sample, std::uint64_t seed,
                    int workers, const std::function<SimTour(Vec, RngStream&)>& simulate,
                    const std::function<bool(std::size_t, SimTour&&)>& consume) {
    const std::size_t batch =
        workers > 1 ? static_cast<std::size_t>(workers) * 4 : std::size_t{1};
    std::vector<SimTour> tours(batch);
    for (std::size_t base = 0;; base += batch) {
        parallel_for(batch, workers, [&](std::size_t j) {
            const std::size_t idx = base + j;
            RngStream rng(seed, idx);
            Vec start = (idx == 0 && x0) ? *x0 : mu_sample(rng);
            tours[j] = simulate(std::move(start), rng);
        });
        for (std::size_t j = 0; j < batch; ++j)
            if (!consume(base + j, std::move(tours[j]))) return;
    }
}

Trajectory assemble_trajectory(int dim, PathKind kind, bool exact, const std::optional<Vec>& x0,
                               const std::function<Vec(RngStream&)>& mu_sample,
                               const StopRule& stop, std::uint64_t seed, int workers,
                               long event_cap,
                               const std::function<SimTour(Vec, RngStream&)>& simulate) {
    if (!std::isfinite(stop.t_max) && stop.max_steps == std::numeric_limits<long>::max())
        throw ConfigError("run: either t_max or max_steps must be finite");
    Trajectory traj;
    traj.dim = dim;
    traj.path_kind = kind;
    traj.exact_dynamics = exact;
    auto push = [&](double t, EventKind k, const Vec& x) {
        traj.events.push_back(Event{t, k, x});
        if (static_cast<long>(traj.events.size()) > event_cap)
            throw ExplosionSuspected("trajectory event cap exceeded");
    };
    auto finish = [&](double t_end) {
        push(t_end, EventKind::FinalState, traj.events.back().x);
        traj.total_time = t_end;
    };
    double t_abs = 0.0;  // absolute start time of the tour being consumed
    generate_tours(x0, mu_sample, seed, workers, simulate,
                   [&](std::size_t idx, SimTour&& tour) -> bool {
                       if (idx == 0) {
                           push(0.0, EventKind::Initial, tour.start);
                       } else {
                           if (traj.steps + 1 > stop.max_steps) {
                               finish(traj.events.back().t);
                               return false;
                           }
                           push(t_abs, EventKind::Regeneration, tour.start);
                           ++traj.steps;
                           ++traj.regen_count;
                       }
                       for (auto& [t_rel, s] : tour.moves) {
                           double t_event = t_abs + t_rel;
                           if (t_event > stop.t_max) {
                               finish(stop.t_max);
                               return false;
                           }
                           if (traj.steps + 1 > stop.max_steps) {
                               finish(traj.events.back().t);
                               return false;
                           }
                           push(t_event, EventKind::LocalMove, s);
                           ++traj.steps;
                       }
                       if (!tour.ended) {
                           finish(std::isfinite(stop.t_max) ? stop.t_max
                                                            : traj.events.back().t);
                           return false;
                       }
                       double t_close = t_abs + tour.tau;
                       if (t_close > stop.t_max) {
                           finish(stop.t_max);
                           return false;
                       }
                       t_abs = t_close;
                       return true;
                   });
    return traj;
}

}  // namespace

Trajectory run_jump_restore(const JumpRestoreSpec& spec, const std::optional<Vec>& x0,
                            const StopRule& stop, std::uint64_t seed, int workers) {
    const long per_tour_cap =
        stop.max_steps == std::numeric_limits<long>::max() ? spec.event_cap : stop.max_steps;
    auto sim = [&](Vec start, RngStream& rng) {
        return simulate_jump_tour(spec, std::move(start), stop.t_max, per_tour_cap, rng);
    };
    return assemble_trajectory(spec.dim, PathKind::PiecewiseConstant, true, x0, spec.mu_sample,
                               stop, seed, workers, spec.event_cap, sim);
}

JumpRestoreSpec discrete_jump_spec(const DiscreteModel& model) {
    const int n = model.n();
    auto kappa_vec = regen_rates_discrete(model);
    std::vector<double> lambda(n), kappa(n);
    std::vector<std::vector<double>> row_cum(n);
    for (int i = 0; i < n; ++i) {
        lambda[i] = -model.Q(i, i);
        kappa[i] = kappa_vec(i);
        row_cum[i].resize(n, 0.0);
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j != i) acc += model.Q(i, j);
            row_cum[i][j] = acc;
        }
    }
    std::vector<double> mu_cum(n, 0.0);
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
        acc += model.mu(j);
        mu_cum[j] = acc;
    }
    JumpRestoreSpec spec;
    spec.dim = 1;
    spec.lambda = [lambda](const Vec& x) { return lambda[static_cast<int>(x[0])]; };
    spec.kappa = [kappa](const Vec& x) { return kappa[static_cast<int>(x[0])]; };
    spec.kernel = [row_cum, lambda](const Vec& x, RngStream& rng) {
        int i = static_cast<int>(x[0]);
        double u = rng.uniform() * lambda[i];
        const auto& cum = row_cum[i];
        int j = 0;
        while (j + 1 < static_cast<int>(cum.size()) && u >= cum[j]) ++j;
        return Vec{static_cast<double>(j)};
    };
    spec.mu_sample = [mu_cum](RngStream& rng) {
        double u = rng.uniform();
        int j = 0;
        while (j + 1 < static_cast<int>(mu_cum.size()) && u >= mu_cum[j]) ++j;
        return Vec{static_cast<double>(j)};
    };
    return spec;
}

Trajectory run_jump_restore(const DiscreteModel& model, int x0, const StopRule& stop,
                            std::uint64_t seed, int workers) {
    if (x0 < 0 || x0 >= model.n()) throw ConfigError("run_jump_restore: x0 out of range");
    return run_jump_restore(discrete_jump_spec(model), Vec{static_cast<double>(x0)}, stop, seed,
                            workers);
}

OccupationStats run_discrete_occupation(const DiscreteModel& model, int x0, double t_max,
                                        std::uint64_t seed, long event_cap) {
    const int n = model.n();
    if (x0 < 0 || x0 >= n) throw ConfigError("run_discrete_occupation: x0 out of range");
    Eigen::VectorXd kappa = regen_rates_discrete(model);
    Eigen::VectorXd lambda(n);
    for (int i = 0; i < n; ++i) lambda(i) = -model.Q(i, i);
    std::vector<std::vector<double>> row_cum(n);
    for (int i = 0; i < n; ++i) {
        row_cum[i].resize(n);
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j != i) acc += model.Q(i, j);
            row_cum[i][j] = acc;
        }
    }
    std::vector<double> mu_cum(n);
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
        acc += model.mu(j);
        mu_cum[j] = acc;
    }

    OccupationStats st;
    st.time_per_state = Eigen::VectorXd::Zero(n);
    st.sum_z = Eigen::VectorXd::Zero(n);
    st.sum_zz = Eigen::MatrixXd::Zero(n, n);
    st.sum_ztau = Eigen::VectorXd::Zero(n);

    Eigen::VectorXd z(n);
    double t = 0.0;
    std::size_t tour_idx = 0;
    while (t < t_max) {
        RngStream rng(seed, tour_idx);
        int x;
        if (tour_idx == 0) {
            x = x0;
        } else {
            double u = rng.uniform();
            x = 0;
            while (x + 1 < n && u >= mu_cum[x]) ++x;
        }
        const bool mu_started = tour_idx > 0;
        z.setZero();
        double tau = 0.0;
        bool complete = false;
        for (;;) {
            double total = lambda(x) + kappa(x);
            if (total <= 0.0)
                throw DegenerateClockError("run_discrete_occupation: absorbing state");
            double hold = rng.exponential(total);
            if (t + hold >= t_max) {
                z(x) += t_max - t;
                t = t_max;
                break;
            }
            z(x) += hold;
            tau += hold;
            t += hold;
            if (++st.events > event_cap)
                throw ExplosionSuspected("run_discrete_occupation: event cap exceeded");
            if (rng.uniform() * total < kappa(x)) {
                complete = true;
                ++st.regen_count;
                break;
            }
            double u = rng.uniform() * lambda(x);
            const auto& cum = row_cum[x];
            int j = 0;
            while (j + 1 < n && u >= cum[j]) ++j;
            x = j;
        }
        st.time_per_state += z;
        if (complete && mu_started) {
            ++st.n_tours;
            st.sum_z += z;
            st.sum_zz += z * z.transpose();
            st.sum_ztau += z * tau;
            st.sum_tau += tau;
            st.sum_tau2 += tau * tau;
        }
        ++tour_idx;
    }
    st.total_time = t_max;
    return st;
}

double truncated_regen_rate(const DiffusionRestoreSpec& spec, const Vec& x) {
    return std::min(regen_rate(spec.target, spec.mu, spec.drift, x), spec.M);
}

namespace {

void validate_diffusion(const DiffusionRestoreSpec& spec, const std::optional<Vec>& x0,
                        std::uint64_t seed) {
    if (!(spec.M > 0.0)) throw ConfigError("run_diffusion_restore: M must be positive");
    // The truncation precondition M > inf kappa cannot be certified globally;
    // probe a handful of mu draws (and x0) and reject configurations where
    // every probe sits above the bound.
    RngStream probe(seed, 0x70726f6265ULL);
    double min_seen = std::numeric_limits<double>::infinity();
    if (x0) min_seen = regen_rate(spec.target, spec.mu, spec.drift, *x0);
    for (int i = 0; i < 16; ++i) {
        Vec x = spec.mu.sample(probe);
        min_seen = std::min(min_seen, regen_rate(spec.target, spec.mu, spec.drift, x));
    }
    if (min_seen > spec.M)
        throw ConfigError(
            "run_diffusion_restore: M appears to lie below inf kappa (every probe exceeded it)");
}

std::function<SimTour(Vec, RngStream&)> diffusion_tour_fn(const DiffusionRestoreSpec& spec,
                                                          double t_max) {
    auto k_m = [&spec](const Vec& x) { return truncated_regen_rate(spec, x); };
    return [&spec, k_m, t_max](Vec start, RngStream& rng) {
        FirstArrival fa =
            thinned_first_arrival(spec.dynamics, start, k_m, spec.M, t_max, rng);
        SimTour tour;
        tour.start = std::move(start);
        tour.moves.reserve(static_cast<std::size_t>(fa.n_candidates));
        for (long j = 1; j <= fa.n_candidates; ++j)
            tour.moves.emplace_back(fa.skeleton.times[static_cast<std::size_t>(j)],
                                    std::move(fa.skeleton.states[static_cast<std::size_t>(j)]));
        tour.tau = fa.time;
        tour.ended = fa.arrived;
        return tour;
    };
}

}  // namespace

Trajectory run_diffusion_restore(const DiffusionRestoreSpec& spec, const std::optional<Vec>& x0,
                                 double t_max, std::uint64_t seed, int workers) {
    validate_diffusion(spec, x0, seed);
    return assemble_trajectory(spec.dynamics.dim(), PathKind::CandidateGrid,
                               spec.dynamics.is_exact(), x0, spec.mu.sample,
                               StopRule{t_max, std::numeric_limits<long>::max()}, seed, workers,
                               spec.event_cap, diffusion_tour_fn(spec, t_max));
}

void run_diffusion_restore_stream(const DiffusionRestoreSpec& spec,
                                  const std::optional<Vec>& x0, double t_max,
                                  std::uint64_t seed, int workers,
                                  const std::function<void(const DiffusionTourView&)>& on_tour) {
    validate_diffusion(spec, x0, seed);
    double t_abs = 0.0;
    std::vector<Vec> candidates;
    generate_tours(x0, spec.mu.sample, seed, workers, diffusion_tour_fn(spec, t_max),
                   [&](std::size_t, SimTour&& tour) -> bool {
                       bool complete = tour.ended && t_abs + tour.tau <= t_max;
                       candidates.clear();
                       candidates.reserve(tour.moves.size());
                       for (auto& [t_rel, s] : tour.moves) candidates.push_back(std::move(s));
                       DiffusionTourView view;
                       view.tau = complete ? tour.tau : t_max - t_abs;
                       view.complete = complete;
                       view.start = &tour.start;
                       view.candidates = &candidates;
                       on_tour(view);
                       if (!complete) return false;
                       t_abs += tour.tau;
                       return true;
                   });
}

Vec run_cftp_draw(const CftpConfig& cfg, RngStream& rng) {
    if (!(cfg.kappa_floor > 0.0))
        throw ConfigError("run_cftp: kappa_floor must be positive");
    if (!(cfg.bound_M >= cfg.kappa_floor))
        throw ConfigError("run_cftp: bound_M must be at least kappa_floor");
    const double excess_bound = cfg.bound_M - cfg.kappa_floor;
    const double T = rng.exponential(cfg.kappa_floor);
    Vec x = cfg.mu_sample(rng);
    double t = 0.0;
    if (excess_bound > 0.0) {
        for (;;) {
            double gap = rng.exponential(excess_bound);
            if (t + gap >= T) break;
            t += gap;
            x = cfg.dynamics.advance(x, gap, rng);
            double k = check_rate(cfg.kappa(x), "run_cftp");
            if (k < cfg.kappa_floor * (1.0 - 1e-12))
                throw AssumptionViolation("run_cftp: kappa fell below the floor at " +
                                          std::to_string(x[0]));
            if (k > cfg.bound_M * (1.0 + 1e-12))
                throw BoundViolationError("run_cftp: kappa exceeded bound_M at " +
                                          std::to_string(x[0]));
            if (rng.uniform() < (k - cfg.kappa_floor) / excess_bound) x = cfg.mu_sample(rng);
        }
    }
    return cfg.dynamics.advance(x, T - t, rng);
}

std::vector<Vec> run_cftp(const CftpConfig& cfg, long n_draws, std::uint64_t seed, int workers) {
    std::vector<Vec> draws(static_cast<std::size_t>(n_draws));
    parallel_for(draws.size(), workers, [&](std::size_t i) {
        RngStream rng(seed, i);
        draws[i] = run_cftp_draw(cfg, rng);
    });
    return draws;
}

RejectionDraw run_rejection_equivalence(const TargetModel& target, const RegenDistribution& mu,
                                        double M, RngStream& rng) {
    if (!(M > 0.0)) throw ConfigError("rejection: M must be positive");
    const double log_m = std::log(M);
    RejectionDraw out;
    for (;;) {
        ++out.n_proposals;
        Vec x = mu.sample(rng);
        double log_ratio = target.logp(x) - mu.log_density(x) - log_m;
        if (log_ratio > 1e-12)
            throw EnvelopeError("rejection: target exceeds M * proposal at a drawn point");
        if (rng.uniform() < std::exp(log_ratio)) {
            out.x = std::move(x);
            return out;
        }
        if (out.n_proposals >= 100000000)
            throw ExplosionSuspected("rejection: proposal count exceeded the cap");
    }
}

}  // namespace restore
