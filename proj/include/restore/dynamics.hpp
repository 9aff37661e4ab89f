#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "restore/common.hpp"
#include "restore/rng.hpp"

namespace restore {

// Local (underlying) Markov dynamics advanced between regeneration events.
// Brownian motion, Ornstein-Uhlenbeck and Constant use exact transition laws;
// JumpProcess simulates its embedded chain exactly; EulerDiffusion is the only
// approximate variant (Euler-Maruyama with fixed step).
class Dynamics {
  public:
    enum class Kind { BrownianMotion, OrnsteinUhlenbeck, EulerDiffusion, JumpProcess, Constant };

    static Dynamics brownian(int dim);
    // dY = theta Y dt + dB per coordinate; theta = 0 reduces to Brownian motion.
    static Dynamics ou(int dim, double theta);
    static Dynamics euler(int dim, std::function<Vec(const Vec&)> drift, double step);
    // Piecewise-constant path: holding rate lambda(x), move drawn from kernel.
    static Dynamics jump(int dim, std::function<Vec(const Vec&, RngStream&)> kernel,
                         std::function<double(const Vec&)> lambda);
    static Dynamics constant(int dim);

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    bool is_exact() const { return kind_ != Kind::EulerDiffusion; }
    double theta() const { return theta_; }
    double step() const { return step_; }

    // State dt time units later. dt <= 0 returns x without consuming randomness.
    Vec advance(const Vec& x, double dt, RngStream& rng) const;

    // Same law as advance; for jump dynamics every internal move is appended
    // to `trace` as (time offset in (0, dt], new state), so the caller can
    // reconstruct the piecewise-constant path exactly.
    Vec advance_traced(const Vec& x, double dt, RngStream& rng,
                       std::vector<std::pair<double, Vec>>* trace) const;

  private:
    Kind kind_ = Kind::Constant;
    int dim_ = 1;
    double theta_ = 0.0;
    double step_ = 1e-3;
    std::function<Vec(const Vec&)> drift_;
    std::function<Vec(const Vec&, RngStream&)> kernel_;
    std::function<double(const Vec&)> lambda_;
};

}  // namespace restore
