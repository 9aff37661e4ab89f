#include "restore/dynamics.hpp"

#include <cmath>

namespace restore {

Dynamics Dynamics::brownian(int dim) {
    Dynamics d;
    d.kind_ = Kind::BrownianMotion;
    d.dim_ = dim;
    return d;
}

Dynamics Dynamics::ou(int dim, double theta) {
    Dynamics d;
    d.kind_ = Kind::OrnsteinUhlenbeck;
    d.dim_ = dim;
    d.theta_ = theta;
    return d;
}

Dynamics Dynamics::euler(int dim, std::function<Vec(const Vec&)> drift, double step) {
    if (!(step > 0.0)) throw ConfigError("euler dynamics: step must be positive");
    Dynamics d;
    d.kind_ = Kind::EulerDiffusion;
    d.dim_ = dim;
    d.step_ = step;
    d.drift_ = std::move(drift);
    return d;
}

Dynamics Dynamics::jump(int dim, std::function<Vec(const Vec&, RngStream&)> kernel,
                        std::function<double(const Vec&)> lambda) {
    Dynamics d;
    d.kind_ = Kind::JumpProcess;
    d.dim_ = dim;
    d.kernel_ = std::move(kernel);
    d.lambda_ = std::move(lambda);
    return d;
}

Dynamics Dynamics::constant(int dim) {
    Dynamics d;
    d.kind_ = Kind::Constant;
    d.dim_ = dim;
    return d;
}

Vec Dynamics::advance(const Vec& x, double dt, RngStream& rng) const {
    return advance_traced(x, dt, rng, nullptr);
}

Vec Dynamics::advance_traced(const Vec& x, double dt, RngStream& rng,
                             std::vector<std::pair<double, Vec>>* trace) const {
    if (!(dt > 0.0)) return x;
    switch (kind_) {
        case Kind::Constant:
            return x;
        case Kind::BrownianMotion: {
            Vec y(x.size());
            double s = std::sqrt(dt);
            for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + s * rng.normal();
            return y;
        }
        case Kind::OrnsteinUhlenbeck: {
            // Exact transition: mean x e^{theta dt}, variance (e^{2 theta dt} - 1) / (2 theta),
            // continuous at theta = 0 where it equals dt.
            double mean_scale = std::exp(theta_ * dt);
            double var = theta_ == 0.0 ? dt : std::expm1(2.0 * theta_ * dt) / (2.0 * theta_);
            double s = std::sqrt(var);
            Vec y(x.size());
            for (std::size_t i = 0; i < x.size(); ++i)
                y[i] = x[i] * mean_scale + s * rng.normal();
            return y;
        }
        case Kind::EulerDiffusion: {
            long n_steps = static_cast<long>(std::ceil(dt / step_));
            if (n_steps < 1) n_steps = 1;
            double h = dt / static_cast<double>(n_steps);
            double s = std::sqrt(h);
            Vec y = x;
            for (long k = 0; k < n_steps; ++k) {
                Vec b = drift_(y);
                for (std::size_t i = 0; i < y.size(); ++i)
                    y[i] += b[i] * h + s * rng.normal();
            }
            return y;
        }
        case Kind::JumpProcess: {
            Vec y = x;
            double t = 0.0;
            for (;;) {
                double rate = lambda_(y);
                if (rate < 0.0)
                    throw DegenerateClockError("jump dynamics: negative holding rate");
                double hold = rng.exponential(rate);
                if (t + hold >= dt) return y;
                t += hold;
                y = kernel_(y, rng);
                if (trace) trace->emplace_back(t, y);
            }
        }
    }
    return x;  // unreachable
}

}  // namespace restore
