// Config-driven experiment runner around librestore: generic runs plus the
// named builtin experiments, emitting events/draws CSVs and a summary JSON.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "restore/analysis.hpp"
#include "restore/builtins.hpp"
#include "restore/estimators.hpp"
#include "restore/experiments.hpp"
#include "restore/io.hpp"
#include "restore/oracle.hpp"
#include "restore/parallel.hpp"
#include "restore/sampler.hpp"

using nlohmann::json;
using namespace restore;

namespace {

// ---------------------------------------------------------------- config ---

struct Issues {
    std::vector<std::string> list;
    void add(std::string s) { list.push_back(std::move(s)); }
    std::size_t size() const { return list.size(); }
    void raise_if_any() const {
        if (!list.empty()) throw ConfigError(list);
    }
};

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    return j;
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed, Issues& iss) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (item.key() == a) {
                known = true;
                break;
            }
        if (!known) iss.add(path + item.key() + ": unknown key");
    }
}

double need_num(const json& j, const std::string& path, const char* k, Issues& iss) {
    if (!j.contains(k)) {
        iss.add(path + k + ": required");
        return 0.0;
    }
    if (!j.at(k).is_number()) {
        iss.add(path + k + ": must be a number");
        return 0.0;
    }
    return j.at(k).get<double>();
}

double opt_num(const json& j, const std::string& path, const char* k, double def, Issues& iss) {
    if (!j.contains(k)) return def;
    if (!j.at(k).is_number()) {
        iss.add(path + k + ": must be a number");
        return def;
    }
    return j.at(k).get<double>();
}

long need_int(const json& j, const std::string& path, const char* k, Issues& iss) {
    if (!j.contains(k)) {
        iss.add(path + k + ": required");
        return 0;
    }
    if (!j.at(k).is_number_integer() && !j.at(k).is_number_unsigned()) {
        iss.add(path + k + ": must be an integer");
        return 0;
    }
    return j.at(k).get<long>();
}

long opt_int(const json& j, const std::string& path, const char* k, long def, Issues& iss) {
    if (!j.contains(k)) return def;
    if (!j.at(k).is_number_integer() && !j.at(k).is_number_unsigned()) {
        iss.add(path + k + ": must be an integer");
        return def;
    }
    return j.at(k).get<long>();
}

std::string need_str(const json& j, const std::string& path, const char* k, Issues& iss) {
    if (!j.contains(k)) {
        iss.add(path + k + ": required");
        return {};
    }
    if (!j.at(k).is_string()) {
        iss.add(path + k + ": must be a string");
        return {};
    }
    return j.at(k).get<std::string>();
}

std::vector<double> need_vec(const json& j, const std::string& path, const char* k,
                             Issues& iss) {
    std::vector<double> out;
    if (!j.contains(k)) {
        iss.add(path + k + ": required");
        return out;
    }
    const json& v = j.at(k);
    if (!v.is_array()) {
        iss.add(path + k + ": must be an array of numbers");
        return out;
    }
    for (const auto& e : v) {
        if (!e.is_number()) {
            iss.add(path + k + ": must be an array of numbers");
            return {};
        }
        out.push_back(e.get<double>());
    }
    return out;
}

std::vector<double> opt_vec(const json& j, const std::string& path, const char* k,
                            std::vector<double> def, Issues& iss) {
    if (!j.contains(k)) return def;
    return need_vec(j, path, k, iss);
}

// --------------------------------------------------------------- parsers ---

std::optional<TargetModel> parse_target(const json& j, const std::string& path, Issues& iss) {
    if (!j.is_object()) {
        iss.add(path + ": must be an object");
        return std::nullopt;
    }
    const std::size_t before = iss.size();
    std::string kind = need_str(j, path, "kind", iss);
    if (kind == "gaussian") {
        check_keys(j, path, {"kind", "mean", "sd"}, iss);
        auto mean = need_vec(j, path, "mean", iss);
        auto sd = need_vec(j, path, "sd", iss);
        if (mean.size() != sd.size() || mean.empty())
            iss.add(path + "mean/sd: must be nonempty arrays of equal length");
        if (iss.size() != before) return std::nullopt;
        return gaussian_target(mean, sd);
    }
    if (kind == "gaussian_mixture") {
        check_keys(j, path, {"kind", "weights", "means", "sds"}, iss);
        auto w = need_vec(j, path, "weights", iss);
        auto m = need_vec(j, path, "means", iss);
        auto s = need_vec(j, path, "sds", iss);
        if (w.size() != m.size() || m.size() != s.size() || w.empty())
            iss.add(path + "weights/means/sds: must be nonempty arrays of equal length");
        if (iss.size() != before) return std::nullopt;
        return gaussian_mixture_target(w, m, s);
    }
    if (kind == "cauchy_posterior") {
        check_keys(j, path, {"kind", "obs"}, iss);
        auto obs = need_vec(j, path, "obs", iss);
        if (obs.empty()) iss.add(path + "obs: must be nonempty");
        if (iss.size() != before) return std::nullopt;
        return cauchy_posterior_target(obs);
    }
    if (!kind.empty())
        iss.add(path + "kind: unknown target kind '" + kind +
                "' (expected gaussian, gaussian_mixture or cauchy_posterior)");
    return std::nullopt;
}

struct ParsedDynamics {
    Dynamics dynamics = Dynamics::brownian(1);
    DriftField drift = DriftField::zero(1);
};

std::optional<ParsedDynamics> parse_dynamics(const json& j, const std::string& path, int dim,
                                             Issues& iss) {
    if (!j.is_object()) {
        iss.add(path + ": must be an object");
        return std::nullopt;
    }
    const std::size_t before = iss.size();
    std::string kind = need_str(j, path, "kind", iss);
    ParsedDynamics out;
    if (kind == "bm") {
        check_keys(j, path, {"kind"}, iss);
        if (iss.size() != before) return std::nullopt;
        out.dynamics = Dynamics::brownian(dim);
        out.drift = DriftField::zero(dim);
        return out;
    }
    if (kind == "ou") {
        check_keys(j, path, {"kind", "theta"}, iss);
        double theta = need_num(j, path, "theta", iss);
        if (iss.size() != before) return std::nullopt;
        out.dynamics = Dynamics::ou(dim, theta);
        out.drift = DriftField::linear(dim, theta);
        return out;
    }
    if (kind == "euler") {
        check_keys(j, path, {"kind", "theta", "step"}, iss);
        double theta = need_num(j, path, "theta", iss);
        double step = need_num(j, path, "step", iss);
        if (iss.size() != before) return std::nullopt;
        out.dynamics = Dynamics::euler(
            dim,
            [theta](const Vec& x) {
                Vec b(x.size());
                for (std::size_t i = 0; i < x.size(); ++i) b[i] = theta * x[i];
                return b;
            },
            step);
        out.drift = DriftField::linear(dim, theta);
        return out;
    }
    if (!kind.empty())
        iss.add(path + "kind: unknown dynamics kind '" + kind + "' (expected bm, ou or euler)");
    return std::nullopt;
}

struct ParsedMu {
    RegenDistribution mu;
    bool minimal = false;
    double kappa_floor = 0.0;  // set when minimal
};

std::optional<ParsedMu> parse_mu(const json& j, const std::string& path, Issues& iss,
                                 const std::optional<TargetModel>& target,
                                 const std::optional<ParsedDynamics>& dyn) {
    if (!j.is_object()) {
        iss.add(path + ": must be an object");
        return std::nullopt;
    }
    const std::size_t before = iss.size();
    std::string kind = need_str(j, path, "kind", iss);
    ParsedMu out;
    if (kind == "gaussian") {
        check_keys(j, path, {"kind", "mean", "sd", "C"}, iss);
        auto mean = need_vec(j, path, "mean", iss);
        auto sd = need_vec(j, path, "sd", iss);
        double C = need_num(j, path, "C", iss);
        if (mean.size() != sd.size() || mean.empty())
            iss.add(path + "mean/sd: must be nonempty arrays of equal length");
        if (iss.size() != before) return std::nullopt;
        out.mu = gaussian_regen(mean, sd, C);
        return out;
    }
    if (kind == "gaussian_mixture") {
        check_keys(j, path, {"kind", "weights", "means", "sds", "C"}, iss);
        auto w = need_vec(j, path, "weights", iss);
        auto m = need_vec(j, path, "means", iss);
        auto s = need_vec(j, path, "sds", iss);
        double C = need_num(j, path, "C", iss);
        if (w.size() != m.size() || m.size() != s.size() || w.empty())
            iss.add(path + "weights/means/sds: must be nonempty arrays of equal length");
        if (iss.size() != before) return std::nullopt;
        out.mu = gaussian_mixture_regen(w, m, s, C);
        return out;
    }
    if (kind == "minimal") {
        check_keys(j, path, {"kind", "kappa_floor", "box_lo", "box_hi", "n_grid"}, iss);
        double kf = need_num(j, path, "kappa_floor", iss);
        auto lo = need_vec(j, path, "box_lo", iss);
        auto hi = need_vec(j, path, "box_hi", iss);
        long n_grid = opt_int(j, path, "n_grid", 2001, iss);
        if (lo.size() != hi.size() || lo.empty())
            iss.add(path + "box_lo/box_hi: must be nonempty arrays of equal length");
        if (!target || !dyn) iss.add(path + ": minimal mu needs a valid target and dynamics");
        if (iss.size() != before) return std::nullopt;
        Box box;
        box.lo = lo;
        box.hi = hi;
        MinimalRegen minimal =
            build_minimal_regen(*target, dyn->drift, kf, box, static_cast<int>(n_grid));
        out.mu = minimal.as_regen();
        out.minimal = true;
        out.kappa_floor = kf;
        return out;
    }
    if (!kind.empty())
        iss.add(path + "kind: unknown mu kind '" + kind +
                "' (expected gaussian, gaussian_mixture or minimal)");
    return std::nullopt;
}

std::optional<DiscreteModel> parse_discrete_model(const json& j, const std::string& path,
                                                  Issues& iss) {
    if (!j.is_object()) {
        iss.add(path + ": must be an object");
        return std::nullopt;
    }
    const std::size_t before = iss.size();
    check_keys(j, path, {"Q", "pi", "mu", "C"}, iss);
    auto pi = need_vec(j, path, "pi", iss);
    auto mu = need_vec(j, path, "mu", iss);
    double C = need_num(j, path, "C", iss);
    std::vector<std::vector<double>> q_rows;
    if (!j.contains("Q")) {
        iss.add(path + "Q: required");
    } else if (!j.at("Q").is_array()) {
        iss.add(path + "Q: must be an array of rows");
    } else {
        for (const auto& row : j.at("Q")) {
            if (!row.is_array()) {
                iss.add(path + "Q: every row must be an array of numbers");
                break;
            }
            std::vector<double> r;
            for (const auto& e : row) {
                if (!e.is_number()) {
                    iss.add(path + "Q: every row must be an array of numbers");
                    break;
                }
                r.push_back(e.get<double>());
            }
            q_rows.push_back(std::move(r));
        }
    }
    const std::size_t n = pi.size();
    if (q_rows.size() != n) iss.add(path + "Q: row count must match pi length");
    for (const auto& r : q_rows)
        if (r.size() != n) {
            iss.add(path + "Q: must be square");
            break;
        }
    if (mu.size() != n) iss.add(path + "mu: length must match pi");
    if (iss.size() != before) return std::nullopt;
    Eigen::MatrixXd Q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Eigen::VectorXd piv(static_cast<Eigen::Index>(n)), muv(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        piv(static_cast<Eigen::Index>(i)) = pi[i];
        muv(static_cast<Eigen::Index>(i)) = mu[i];
        for (std::size_t k = 0; k < n; ++k)
            Q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = q_rows[i][k];
    }
    return DiscreteModel(Q, piv, muv, C);
}

// --------------------------------------------------------------- summary ---

json base_summary(const std::string& experiment, const json& cfg, std::uint64_t seed,
                  int workers) {
    json s;
    s["version"] = io::kVersion;
    s["experiment"] = experiment;
    s["seed"] = seed;
    s["workers"] = workers;
    s["config"] = cfg;
    return s;
}

json estimator_block(const EstimateReport& r) {
    json b;
    b["estimate"] = r.estimate;
    b["sigma2_hat"] = r.sigma2_hat;
    if (std::isfinite(r.n_eff))
        b["n_eff"] = r.n_eff;
    else
        b["n_eff"] = "infinity";
    b["ci_low"] = r.ci_low;
    b["ci_high"] = r.ci_high;
    b["level"] = r.level;
    b["n_tours"] = r.n_tours;
    b["excluded_tours"] = r.excluded_tours;
    b["empty_candidate_tours"] = r.empty_candidate_tours;
    b["small_sample"] = r.small_sample;
    return b;
}

void attach_estimator(json& summary, const Trajectory& traj) {
    try {
        summary["estimator"] = estimator_block(summarize(traj, [](const Vec& x) { return x[0]; }));
        summary["estimand"] = "x0";
    } catch (const InsufficientData& e) {
        summary["estimator"] = nullptr;
        summary["estimator_note"] = e.what();
    }
}

void write_summary(const std::string& out_dir, const json& s) {
    io::write_text(out_dir + "/summary.json", s.dump(2) + "\n");
}

void write_histogram_csv(const std::string& path, const experiments::BinGrid& grid,
                         const std::vector<double>& observed,
                         const std::vector<double>& expected) {
    std::string text = "bin_lo,bin_hi,observed,expected\n";
    for (int b = 0; b < grid.n; ++b) {
        auto ub = static_cast<std::size_t>(b);
        text += io::format_double(grid.edge(b)) + "," + io::format_double(grid.edge(b + 1)) +
                "," + io::format_double(observed[ub]) + "," + io::format_double(expected[ub]) +
                "\n";
    }
    io::write_text(path, text);
}

// -------------------------------------------------------------- commands ---

int cmd_run_jump(const json& cfg, std::uint64_t seed, int workers, const std::string& out) {
    Issues iss;
    check_keys(cfg, "", {"seed", "workers", "out_dir", "model", "x0", "t_max", "max_steps"},
               iss);
    std::optional<DiscreteModel> model;
    if (!cfg.contains("model"))
        iss.add("model: required");
    else
        model = parse_discrete_model(cfg.at("model"), "model.", iss);
    long x0 = opt_int(cfg, "", "x0", 0, iss);
    double t_max = opt_num(cfg, "", "t_max", std::numeric_limits<double>::infinity(), iss);
    long max_steps = opt_int(cfg, "", "max_steps", std::numeric_limits<long>::max(), iss);
    if (!std::isfinite(t_max) && max_steps == std::numeric_limits<long>::max())
        iss.add("t_max or max_steps: at least one budget is required");
    iss.raise_if_any();

    StopRule stop;
    stop.t_max = t_max;
    stop.max_steps = max_steps;
    Trajectory traj = run_jump_restore(*model, static_cast<int>(x0), stop, seed, workers);
    io::write_events_csv(out + "/events.csv", traj);
    json s = base_summary("run-jump", cfg, seed, workers);
    s["regen_count"] = traj.regen_count;
    s["steps"] = traj.steps;
    s["total_time"] = traj.total_time;
    s["exact_dynamics"] = traj.exact_dynamics;
    attach_estimator(s, traj);
    write_summary(out, s);
    return 0;
}

int cmd_run_diffusion(const json& cfg, std::uint64_t seed, int workers, const std::string& out) {
    Issues iss;
    check_keys(cfg, "",
               {"seed", "workers", "out_dir", "target", "dynamics", "mu", "M", "t_max", "x0"},
               iss);
    std::optional<TargetModel> target;
    if (!cfg.contains("target"))
        iss.add("target: required");
    else
        target = parse_target(cfg.at("target"), "target.", iss);
    const int dim = target ? target->dim : 1;
    std::optional<ParsedDynamics> dyn;
    if (!cfg.contains("dynamics"))
        iss.add("dynamics: required");
    else
        dyn = parse_dynamics(cfg.at("dynamics"), "dynamics.", dim, iss);
    std::optional<ParsedMu> mu;
    if (!cfg.contains("mu"))
        iss.add("mu: required");
    else
        mu = parse_mu(cfg.at("mu"), "mu.", iss, target, dyn);
    double M = need_num(cfg, "", "M", iss);
    double t_max = need_num(cfg, "", "t_max", iss);
    std::optional<Vec> x0;
    if (cfg.contains("x0")) {
        auto v = need_vec(cfg, "", "x0", iss);
        if (static_cast<int>(v.size()) != dim) iss.add("x0: length must match target dim");
        x0 = v;
    }
    iss.raise_if_any();

    DiffusionRestoreSpec spec;
    spec.target = *target;
    spec.mu = mu->mu;
    spec.drift = dyn->drift;
    spec.dynamics = dyn->dynamics;
    spec.M = M;
    Trajectory traj = run_diffusion_restore(spec, x0, t_max, seed, workers);
    io::write_events_csv(out + "/events.csv", traj);
    json s = base_summary("run-diffusion", cfg, seed, workers);
    s["regen_count"] = traj.regen_count;
    s["steps"] = traj.steps;
    s["total_time"] = traj.total_time;
    s["exact_dynamics"] = traj.exact_dynamics;
    attach_estimator(s, traj);
    write_summary(out, s);
    return 0;
}

int cmd_cftp(const json& cfg, std::uint64_t seed, int workers, const std::string& out) {
    Issues iss;
    check_keys(cfg, "",
               {"seed", "workers", "out_dir", "target", "dynamics", "mu", "kappa_floor", "M",
                "n_draws"},
               iss);
    std::optional<TargetModel> target;
    if (!cfg.contains("target"))
        iss.add("target: required");
    else
        target = parse_target(cfg.at("target"), "target.", iss);
    const int dim = target ? target->dim : 1;
    std::optional<ParsedDynamics> dyn;
    if (!cfg.contains("dynamics"))
        iss.add("dynamics: required");
    else
        dyn = parse_dynamics(cfg.at("dynamics"), "dynamics.", dim, iss);
    std::optional<ParsedMu> mu;
    if (!cfg.contains("mu"))
        iss.add("mu: required");
    else
        mu = parse_mu(cfg.at("mu"), "mu.", iss, target, dyn);
    double kappa_floor = need_num(cfg, "", "kappa_floor", iss);
    double M = need_num(cfg, "", "M", iss);
    long n_draws = need_int(cfg, "", "n_draws", iss);
    if (n_draws < 1 && iss.size() == 0) iss.add("n_draws: must be positive");
    iss.raise_if_any();

    CftpConfig ccfg;
    ccfg.dynamics = dyn->dynamics;
    ccfg.mu_sample = mu->mu.sample;
    ccfg.kappa_floor = kappa_floor;
    ccfg.bound_M = M;
    if (mu->minimal) {
        // with the minimal distribution the rate is max(partial rate, floor)
        TargetModel t = *target;
        DriftField dr = dyn->drift;
        ccfg.kappa = [t, dr, kappa_floor](const Vec& x) {
            return kappa_star(t, dr, kappa_floor, x);
        };
    } else {
        TargetModel t = *target;
        DriftField dr = dyn->drift;
        RegenDistribution m = mu->mu;
        ccfg.kappa = [t, dr, m](const Vec& x) { return regen_rate(t, m, dr, x); };
    }
    std::vector<Vec> draws = run_cftp(ccfg, n_draws, seed, workers);
    io::write_draws_csv(out + "/draws.csv", draws);
    json s = base_summary("cftp", cfg, seed, workers);
    s["n_draws"] = n_draws;
    s["kappa_floor"] = kappa_floor;
    s["M"] = M;
    s["exact_dynamics"] = dyn->dynamics.is_exact();
    write_summary(out, s);
    return 0;
}

int cmd_rejection(const json& cfg, std::uint64_t seed, int workers, const std::string& out) {
    Issues iss;
    check_keys(cfg, "", {"seed", "workers", "out_dir", "target", "mu", "M", "n_draws"}, iss);
    std::optional<TargetModel> target;
    if (!cfg.contains("target"))
        iss.add("target: required");
    else
        target = parse_target(cfg.at("target"), "target.", iss);
    std::optional<ParsedMu> mu;
    if (!cfg.contains("mu"))
        iss.add("mu: required");
    else
        mu = parse_mu(cfg.at("mu"), "mu.", iss, target, std::nullopt);
    double M = need_num(cfg, "", "M", iss);
    long n_draws = need_int(cfg, "", "n_draws", iss);
    if (n_draws < 1 && iss.size() == 0) iss.add("n_draws: must be positive");
    iss.raise_if_any();

    std::vector<Vec> draws(static_cast<std::size_t>(n_draws));
    std::vector<long> proposals(static_cast<std::size_t>(n_draws));
    const TargetModel& t = *target;
    const RegenDistribution& m = mu->mu;
    parallel_for(draws.size(), workers, [&](std::size_t i) {
        RngStream rng(seed, i);
        RejectionDraw d = run_rejection_equivalence(t, m, M, rng);
        draws[i] = std::move(d.x);
        proposals[i] = d.n_proposals;
    });
    double mean_prop = 0.0;
    for (long p : proposals) mean_prop += static_cast<double>(p);
    mean_prop /= static_cast<double>(n_draws);
    io::write_draws_csv(out + "/draws.csv", draws);
    json s = base_summary("rejection", cfg, seed, workers);
    s["n_draws"] = n_draws;
    s["M"] = M;
    s["mean_proposals"] = mean_prop;
    write_summary(out, s);
    return 0;
}

int cmd_truncate_study(const json& cfg, std::uint64_t seed, int workers,
                       const std::string& out) {
    Issues iss;
    check_keys(cfg, "",
               {"seed", "workers", "out_dir", "levels", "reference_m", "t_max", "n_bins",
                "bin_lo", "bin_hi", "bound_paths", "bound_t_cap", "c"},
               iss);
    auto levels = opt_vec(cfg, "", "levels", {2.0, 5.0, 10.0, 20.0}, iss);
    double reference_m = opt_num(cfg, "", "reference_m", 50.0, iss);
    double t_max = opt_num(cfg, "", "t_max", 50000.0, iss);
    long n_bins = opt_int(cfg, "", "n_bins", 100, iss);
    double bin_lo = opt_num(cfg, "", "bin_lo", -5.0, iss);
    double bin_hi = opt_num(cfg, "", "bin_hi", 5.0, iss);
    long bound_paths = opt_int(cfg, "", "bound_paths", 20000, iss);
    double bound_t_cap = opt_num(cfg, "", "bound_t_cap", 20.0, iss);
    double c = opt_num(cfg, "", "c", 1.5, iss);
    iss.raise_if_any();

    experiments::GaussianTestbed bed = experiments::gaussian_testbed(c);
    experiments::TruncateStudyResult res = experiments::run_truncate_study(
        bed, levels, reference_m, t_max, seed, workers, static_cast<int>(n_bins), bin_lo,
        bin_hi, bound_paths, bound_t_cap);

    std::string csv = "M,L_M,bound_bm,bound_mc,tv_empirical\n";
    for (const TruncationReport& r : res.rows)
        csv += io::format_double(r.M) + "," + io::format_double(r.L_M) + "," +
               io::format_double(r.bound_bm) + "," + io::format_double(r.bound_general) + "," +
               io::format_double(r.tv_estimate) + "\n";
    io::write_text(out + "/study.csv", csv);

    json s = base_summary("truncate-study", cfg, seed, workers);
    json rows = json::array();
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        json r;
        r["M"] = res.rows[i].M;
        r["L_M"] = res.rows[i].L_M;
        r["bound_bm"] = res.rows[i].bound_bm;
        r["bound_mc"] = res.rows[i].bound_general;
        r["mc_se"] = res.mc_se[i];
        r["tv_empirical"] = res.rows[i].tv_estimate;
        r["noise_allowance"] = res.noise_allowance[i];
        rows.push_back(r);
    }
    s["levels"] = rows;
    s["reference_M"] = res.reference_M;
    s["reference_tours"] = res.reference.n_tours;
    write_summary(out, s);
    return 0;
}

int cmd_oracle_check(const json& cfg, std::uint64_t seed, int workers, const std::string& out) {
    Issues iss;
    check_keys(cfg, "",
               {"seed", "workers", "out_dir", "n_models", "min_states", "max_states", "t_max",
                "p_threshold"},
               iss);
    long n_models = opt_int(cfg, "", "n_models", 200, iss);
    long min_states = opt_int(cfg, "", "min_states", 2, iss);
    long max_states = opt_int(cfg, "", "max_states", 8, iss);
    double t_max = opt_num(cfg, "", "t_max", 1e5, iss);
    double p_threshold = opt_num(cfg, "", "p_threshold", 0.001, iss);
    if (min_states < 2 || max_states < min_states)
        iss.add("min_states/max_states: need 2 <= min <= max");
    iss.raise_if_any();

    struct Row {
        int n_states = 0;
        double residual = 0.0;
        double stationary_err = 0.0;
        double chi2_p = 0.0;
    };
    std::vector<Row> rows(static_cast<std::size_t>(n_models));
    const long span = max_states - min_states + 1;
    parallel_for(rows.size(), workers, [&](std::size_t i) {
        const int n_states = static_cast<int>(min_states + static_cast<long>(i) % span);
        std::uint64_t model_seed = seed ^ (0x9e3779b97f4a7c15ULL * (i + 1));
        DiscreteModel model = oracle::random_discrete_model(n_states, model_seed);
        Row r;
        r.n_states = n_states;
        r.residual = oracle::check_invariance(model);
        Eigen::VectorXd v = oracle::stationary_vector(oracle::full_generator(model).L);
        r.stationary_err = (v - model.pi).cwiseAbs().maxCoeff();
        OccupationStats occ =
            run_discrete_occupation(model, 0, t_max, model_seed ^ 0x517cc1b727220a95ULL);
        r.chi2_p = oracle::occupation_chi2_pvalue(occ, model.pi);
        rows[i] = r;
    });

    long chi2_pass = 0;
    double max_residual = 0.0, max_stat_err = 0.0;
    std::string csv = "model,n_states,residual,stationary_err,chi2_p\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& r = rows[i];
        if (r.chi2_p > p_threshold) ++chi2_pass;
        max_residual = std::max(max_residual, r.residual);
        max_stat_err = std::max(max_stat_err, r.stationary_err);
        csv += std::to_string(i) + "," + std::to_string(r.n_states) + "," +
               io::format_double(r.residual) + "," + io::format_double(r.stationary_err) + "," +
               io::format_double(r.chi2_p) + "\n";
        std::cout << "model " << i << " states=" << r.n_states << " residual=" << r.residual
                  << " stationary_err=" << r.stationary_err << " chi2_p=" << r.chi2_p << "\n";
    }
    io::write_text(out + "/oracle.csv", csv);
    const double chi2_fraction =
        static_cast<double>(chi2_pass) / static_cast<double>(n_models);
    const bool pass =
        max_residual <= 1e-10 && max_stat_err <= 1e-9 && chi2_fraction >= 0.95;
    std::cout << (pass ? "PASS" : "FAIL") << ": max_residual=" << max_residual
              << " max_stationary_err=" << max_stat_err << " chi2_pass_fraction="
              << chi2_fraction << "\n";

    json s = base_summary("oracle-check", cfg, seed, workers);
    s["n_models"] = n_models;
    s["max_residual"] = max_residual;
    s["max_stationary_err"] = max_stat_err;
    s["chi2_pass_fraction"] = chi2_fraction;
    s["pass"] = pass;
    write_summary(out, s);
    return 0;
}

int cmd_cauchy_cftp(const json& cfg, std::uint64_t seed, int workers, const std::string& out) {
    Issues iss;
    check_keys(cfg, "", {"seed", "workers", "out_dir", "n_draws", "n_bins", "kappa_floor"},
               iss);
    long n_draws = opt_int(cfg, "", "n_draws", 30000, iss);
    long n_bins = opt_int(cfg, "", "n_bins", 50, iss);
    double kappa_floor = opt_num(cfg, "", "kappa_floor", 4.0, iss);
    iss.raise_if_any();

    experiments::CauchyCftpResult res = experiments::run_cauchy_cftp(
        n_draws, seed, workers, static_cast<int>(n_bins), kappa_floor);
    io::write_draws_csv(out + "/draws.csv", res.draws);
    write_histogram_csv(out + "/histogram.csv", res.grid, res.histogram, res.expected);
    json s = base_summary("cauchy-cftp", cfg, seed, workers);
    s["n_draws"] = n_draws;
    s["kappa_floor"] = res.kappa_floor;
    s["M"] = res.M;
    s["C_star"] = res.C_star;
    s["tv"] = res.tv;
    s["exact_dynamics"] = true;
    write_summary(out, s);
    return 0;
}

int cmd_mixture_jump(const json& cfg, std::uint64_t seed, int workers, const std::string& out) {
    Issues iss;
    check_keys(cfg, "", {"seed", "workers", "out_dir", "steps", "n_bins"}, iss);
    long steps = opt_int(cfg, "", "steps", 300000, iss);
    long n_bins = opt_int(cfg, "", "n_bins", 100, iss);
    iss.raise_if_any();

    experiments::MixtureJumpResult res =
        experiments::run_mixture_jump(steps, seed, workers, static_cast<int>(n_bins));
    io::write_events_csv(out + "/events.csv", res.traj);
    write_histogram_csv(out + "/histogram.csv", res.grid, res.histogram, res.expected);
    json s = base_summary("mixture-jump", cfg, seed, workers);
    s["steps"] = res.traj.steps;
    s["regen_count"] = res.traj.regen_count;
    s["regen_fraction"] = res.regen_fraction;
    s["total_time"] = res.traj.total_time;
    s["tv"] = res.tv;
    s["exact_dynamics"] = true;
    s["estimator"] = estimator_block(res.mean_report);
    s["estimand"] = "x0";
    write_summary(out, s);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Restore process sampler and experiment runner"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    int workers = 1;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"run-jump", "Jump Restore run on a discrete model"},
        {"run-diffusion", "Diffusion Restore run with truncated thinning"},
        {"cftp", "Exact draws via the dominated CFTP construction"},
        {"rejection", "Classical rejection sampling (degenerate Restore)"},
        {"truncate-study", "Truncation bias study on the Gaussian testbed"},
        {"oracle-check", "Discrete generator invariance and occupation checks"},
        {"cauchy-cftp", "Builtin: heavy-tailed posterior, exact draws"},
        {"mixture-jump", "Builtin: Gaussian mixture jump Restore"},
    };
    for (const auto& [name, desc] : commands) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--seed", seed, "master RNG seed (overrides config)");
        sub->add_option("--workers", workers, "worker threads (overrides config)");
        sub->add_option("--out", out_dir, "output directory (overrides config)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    try {
        json cfg = load_config(config_path);
        std::uint64_t eff_seed = seed;
        if (sub->count("--seed") == 0 && cfg.contains("seed")) {
            if (!cfg.at("seed").is_number_unsigned())
                throw ConfigError("seed: must be a nonnegative integer");
            eff_seed = cfg.at("seed").get<std::uint64_t>();
        }
        int eff_workers = workers;
        if (sub->count("--workers") == 0 && cfg.contains("workers")) {
            if (!cfg.at("workers").is_number_integer() && !cfg.at("workers").is_number_unsigned())
                throw ConfigError("workers: must be an integer");
            eff_workers = cfg.at("workers").get<int>();
        }
        if (eff_workers < 1) throw ConfigError("workers: must be at least 1");
        std::string eff_out = out_dir;
        if (sub->count("--out") == 0 && cfg.contains("out_dir")) {
            if (!cfg.at("out_dir").is_string())
                throw ConfigError("out_dir: must be a string");
            eff_out = cfg.at("out_dir").get<std::string>();
        }
        std::filesystem::create_directories(eff_out);

        int rc = 1;
        if (name == "run-jump") rc = cmd_run_jump(cfg, eff_seed, eff_workers, eff_out);
        else if (name == "run-diffusion") rc = cmd_run_diffusion(cfg, eff_seed, eff_workers, eff_out);
        else if (name == "cftp") rc = cmd_cftp(cfg, eff_seed, eff_workers, eff_out);
        else if (name == "rejection") rc = cmd_rejection(cfg, eff_seed, eff_workers, eff_out);
        else if (name == "truncate-study") rc = cmd_truncate_study(cfg, eff_seed, eff_workers, eff_out);
        else if (name == "oracle-check") rc = cmd_oracle_check(cfg, eff_seed, eff_workers, eff_out);
        else if (name == "cauchy-cftp") rc = cmd_cauchy_cftp(cfg, eff_seed, eff_workers, eff_out);
        else if (name == "mixture-jump") rc = cmd_mixture_jump(cfg, eff_seed, eff_workers, eff_out);
        if (rc == 0) std::cout << "{\"ok\":true,\"out_dir\":" << json(eff_out).dump() << "}\n";
        return rc;
    } catch (const ConfigError& e) {
        json err;
        err["ok"] = false;
        err["error"] = "config";
        err["message"] = e.what();
        err["issues"] = e.issues;
        std::cout << err.dump(2) << "\n";
        return 2;
    } catch (const RestoreError& e) {
        json err;
        err["ok"] = false;
        err["error"] = "runtime";
        err["message"] = e.what();
        std::cout << err.dump(2) << "\n";
        return 3;
    } catch (const std::exception& e) {
        json err;
        err["ok"] = false;
        err["error"] = "internal";
        err["message"] = e.what();
        std::cout << err.dump(2) << "\n";
        return 3;
    }
}
