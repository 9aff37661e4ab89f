#include "restore/oracle.hpp"

#include <cmath>

#include "restore/rng.hpp"
#include "restore/stats.hpp"

namespace restore::oracle {

FullGenerator full_generator(const DiscreteModel& model) {
    return full_generator_with_kappa(model, regen_rates_discrete(model));
}

FullGenerator full_generator_with_kappa(const DiscreteModel& model,
                                        const Eigen::VectorXd& kappa) {
    const int n = model.n();
    FullGenerator g;
    g.kappa = kappa;
    g.L = model.Q;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            g.L(i, j) += kappa(i) * (model.mu(j) - (i == j ? 1.0 : 0.0));
        }
    }
    return g;
}

double invariance_residual(const Eigen::VectorXd& pi, const Eigen::MatrixXd& L) {
    return (pi.transpose() * L).cwiseAbs().maxCoeff();
}

double check_invariance(const DiscreteModel& model) {
    return invariance_residual(model.pi, full_generator(model).L);
}

Eigen::VectorXd stationary_vector(const Eigen::MatrixXd& L) {
    const int n = static_cast<int>(L.rows());
    if (n < 2) throw RankError("stationary_vector: need at least two states");
    // Solve v^T L = 0 with sum(v) = 1: append the normalization row to L^T and
    // solve the overdetermined system by QR.
    Eigen::MatrixXd A(n + 1, n);
    A.topRows(n) = L.transpose();
    A.bottomRows(1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
    b(n) = 1.0;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    // Irreducibility means rank(L) = n - 1, so A has full column rank.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_l(L);
    qr_l.setThreshold(1e-10);
    if (qr_l.rank() != n - 1)
        throw RankError("stationary_vector: generator rank is not n-1 (not irreducible?)");
    Eigen::VectorXd v = qr.solve(b);
    double scale = L.cwiseAbs().maxCoeff();
    if ((L.transpose() * v).cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, scale))
        throw RankError("stationary_vector: solve residual too large");
    for (int i = 0; i < n; ++i)
        if (v(i) < -1e-9) throw RankError("stationary_vector: negative stationary mass");
    return v.cwiseMax(0.0) / v.cwiseMax(0.0).sum();
}

DiscreteModel random_discrete_model(int n_states, std::uint64_t seed) {
    RngStream rng(seed);
    const int n = n_states;
    Eigen::MatrixXd Q(n, n);
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            Q(i, j) = rng.exponential(1.0);
            row += Q(i, j);
        }
        Q(i, i) = -row;
    }
    // Dirichlet(1,...,1) via normalized Exp(1) draws.
    Eigen::VectorXd pi(n), mu(n);
    for (int i = 0; i < n; ++i) pi(i) = rng.exponential(1.0);
    for (int i = 0; i < n; ++i) mu(i) = rng.exponential(1.0);
    pi /= pi.sum();
    mu /= mu.sum();
    // Smallest C with kappa >= 0 everywhere: C >= -(pi^T Q)_i / mu_i.
    double c_min = 0.0;
    Eigen::VectorXd flow = Q.transpose() * pi;
    for (int i = 0; i < n; ++i) c_min = std::max(c_min, -flow(i) / mu(i));
    return DiscreteModel(Q, pi, mu, c_min + 0.1);
}

double occupation_chi2_pvalue(const OccupationStats& stats, const Eigen::VectorXd& pi_ref) {
    const long n = stats.n_tours;
    if (n < 50) throw InsufficientData("occupation_chi2_pvalue: too few tours");
    const int k = static_cast<int>(pi_ref.size());
    const double tau_bar = stats.sum_tau / static_cast<double>(n);
    Eigen::VectorXd p_hat = stats.sum_z / stats.sum_tau;
    // Influence terms v_i = (z_i - p_hat tau_i) / tau_bar have mean exactly
    // zero and sum exactly zero across states; their covariance drives the
    // ratio estimator. Assembled from the streamed moments.
    Eigen::MatrixXd S = stats.sum_zz;
    S -= p_hat * stats.sum_ztau.transpose();
    S -= stats.sum_ztau * p_hat.transpose();
    S += stats.sum_tau2 * (p_hat * p_hat.transpose());
    S /= (tau_bar * tau_bar * static_cast<double>(n - 1));
    // Rank k-1 by the sum-to-zero constraint: test on the first k-1 coords.
    Eigen::VectorXd d = (p_hat - pi_ref).head(k - 1);
    Eigen::MatrixXd S11 = S.topLeftCorner(k - 1, k - 1);
    Eigen::LDLT<Eigen::MatrixXd> solver(S11);
    if (solver.info() != Eigen::Success)
        throw RankError("occupation_chi2_pvalue: singular tour covariance");
    double t_stat = static_cast<double>(n) * d.dot(solver.solve(d));
    return stats::chi2_sf(t_stat, static_cast<double>(k - 1));
}

}  // namespace restore::oracle
