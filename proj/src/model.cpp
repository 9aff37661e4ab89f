#include "restore/model.hpp"

#include <cmath>
#include <limits>

namespace restore {

TargetModel TargetModel::analytic(int dim, std::function<double(const Vec&)> logp,
                                  std::function<Vec(const Vec&)> grad_u,
                                  std::function<double(const Vec&)> lap_u) {
    TargetModel m;
    m.dim = dim;
    m.log_density = std::move(logp);
    m.grad_U_fn = std::move(grad_u);
    m.laplacian_U_fn = std::move(lap_u);
    return m;
}

TargetModel TargetModel::finite_difference(int dim, std::function<double(const Vec&)> logp,
                                           double h) {
    TargetModel m;
    m.dim = dim;
    m.log_density = std::move(logp);
    m.fd_step = h;
    return m;
}

double TargetModel::logp(const Vec& x) const {
    double v = log_density(x);
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
        throw EvaluationError("target log-density not finite at evaluation point");
    return v;
}

Vec TargetModel::grad_U(const Vec& x) const {
    if (grad_U_fn) return grad_U_fn(x);
    // U = -log pibar, central differences.
    Vec g(x.size());
    Vec xp = x, xm = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + fd_step;
        xm[i] = x[i] - fd_step;
        g[i] = -(logp(xp) - logp(xm)) / (2.0 * fd_step);
        xp[i] = x[i];
        xm[i] = x[i];
    }
    return g;
}

double TargetModel::laplacian_U(const Vec& x) const {
    if (laplacian_U_fn) return laplacian_U_fn(x);
    double center = logp(x);
    double lap = 0.0;
    Vec xp = x, xm = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + fd_step;
        xm[i] = x[i] - fd_step;
        lap -= (logp(xp) - 2.0 * center + logp(xm)) / (fd_step * fd_step);
        xp[i] = x[i];
        xm[i] = x[i];
    }
    return lap;
}

DriftField DriftField::zero(int dim) {
    DriftField d;
    d.b = [dim](const Vec&) { return Vec(dim, 0.0); };
    d.div_b = [](const Vec&) { return 0.0; };
    return d;
}

DriftField DriftField::linear(int dim, double theta) {
    DriftField d;
    d.b = [theta](const Vec& x) {
        Vec out(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = theta * x[i];
        return out;
    };
    d.div_b = [dim, theta](const Vec&) { return theta * dim; };
    return d;
}

DriftField DriftField::numeric(int dim, std::function<Vec(const Vec&)> drift, double h) {
    DriftField d;
    auto fn = std::move(drift);
    d.b = fn;
    d.div_b = [fn, h](const Vec& x) {
        double div = 0.0;
        Vec xp = x, xm = x;
        for (std::size_t i = 0; i < x.size(); ++i) {
            xp[i] = x[i] + h;
            xm[i] = x[i] - h;
            div += (fn(xp)[i] - fn(xm)[i]) / (2.0 * h);
            xp[i] = x[i];
            xm[i] = x[i];
        }
        return div;
    };
    (void)dim;
    return d;
}

double partial_rate_diffusion(const TargetModel& target, const DriftField& drift, const Vec& x) {
    Vec g = target.grad_U(x);
    double lap = target.laplacian_U(x);
    double val = 0.5 * (-lap + norm2(g)) + dot(drift.b(x), g) - drift.div_b(x);
    if (std::isnan(val))
        throw EvaluationError("partial regeneration rate evaluated to NaN");
    return val;
}

double regen_rate(const TargetModel& target, const RegenDistribution& mu, const DriftField& drift,
                  const Vec& x) {
    double kt = partial_rate_diffusion(target, drift, x);
    double log_ratio = mu.log_density(x) - target.logp(x);
    double kappa = kt + mu.C * std::exp(log_ratio);
    return check_rate(kappa, "regen_rate");
}

DiscreteModel::DiscreteModel(Eigen::MatrixXd q, Eigen::VectorXd pi_in, Eigen::VectorXd mu_in,
                             double c)
    : Q(std::move(q)), pi(std::move(pi_in)), mu(std::move(mu_in)), C(c) {
    const int k = static_cast<int>(Q.rows());
    std::vector<std::string> issues;
    if (Q.cols() != k) issues.push_back("Q must be square");
    if (pi.size() != k || mu.size() != k) issues.push_back("pi/mu size must match Q");
    if (C < 0.0) issues.push_back("C must be nonnegative");
    if (!issues.empty()) throw ConfigError(issues);
    for (int i = 0; i < k; ++i) {
        if (std::fabs(Q.row(i).sum()) > 1e-12 * std::max(1.0, Q.row(i).cwiseAbs().maxCoeff()))
            issues.push_back("Q row " + std::to_string(i) + " does not sum to zero");
        for (int j = 0; j < k; ++j)
            if (i != j && Q(i, j) < 0.0)
                issues.push_back("Q off-diagonal (" + std::to_string(i) + "," +
                                 std::to_string(j) + ") negative");
        if (pi(i) <= 0.0) issues.push_back("pi must be strictly positive");
        if (mu(i) < 0.0) issues.push_back("mu must be nonnegative");
    }
    if (pi.sum() <= 0.0 || mu.sum() <= 0.0) issues.push_back("pi/mu must have positive mass");
    if (!issues.empty()) throw ConfigError(issues);
    pi /= pi.sum();
    mu /= mu.sum();
}

double regen_rate_discrete(const DiscreteModel& model, int state) {
    double flow = model.pi.dot(model.Q.col(state));
    double kappa = flow / model.pi(state) + model.C * model.mu(state) / model.pi(state);
    return check_rate(kappa, "regen_rate_discrete");
}

Eigen::VectorXd regen_rates_discrete(const DiscreteModel& model) {
    Eigen::VectorXd k(model.n());
    for (int i = 0; i < model.n(); ++i) k(i) = regen_rate_discrete(model, i);
    return k;
}

double regen_rate_jump(const std::function<double(const Vec&)>& flow,
                       const std::function<double(const Vec&)>& lambda,
                       const std::function<double(const Vec&)>& pi,
                       const std::function<double(const Vec&)>& mu, double C, const Vec& x) {
    double px = pi(x);
    if (!(px > 0.0)) throw EvaluationError("regen_rate_jump: pi(x) must be positive");
    double kappa = (flow(x) - lambda(x) * px) / px + C * mu(x) / px;
    return check_rate(kappa, "regen_rate_jump");
}

double mh_flow(
    const std::function<double(const std::function<double(const Vec&)>&)>& integrate,
    const std::function<double(const Vec&)>& pi, const std::function<double(const Vec&)>& lambda,
    const std::function<double(const Vec&, const Vec&)>& alpha,
    const std::function<double(const Vec&, const Vec&)>& q,
    const std::function<double(const Vec&)>& total_jump_prob, const Vec& x) {
    double moved = integrate(
        [&](const Vec& y) { return pi(y) * lambda(y) * alpha(y, x) * q(y, x); });
    return moved + lambda(x) * (1.0 - total_jump_prob(x)) * pi(x);
}

}  // namespace restore
