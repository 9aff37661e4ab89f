#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace restore {

// State of the process: a point in R^d. Discrete state spaces embed their
// index as a 1-d point.
using Vec = std::vector<double>;

struct RestoreError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Regeneration rate evaluated below -tol_neg. Values in [-tol_neg, 0) are
// clamped to zero by the rate functions; anything lower is a modelling error.
struct NegativeRateError : RestoreError {
    using RestoreError::RestoreError;
};

// A density or derivative evaluated to NaN/Inf where a finite value is required.
struct EvaluationError : RestoreError {
    using RestoreError::RestoreError;
};

// All competing clock rates vanished: no event can ever fire.
struct DegenerateClockError : RestoreError {
    using RestoreError::RestoreError;
};

// A rate exceeded the thinning bound M along the path.
struct BoundViolationError : RestoreError {
    using RestoreError::RestoreError;
};

// A run-time check of a standing assumption failed (e.g. kappa below the
// homogeneous floor during exact sampling).
struct AssumptionViolation : RestoreError {
    using RestoreError::RestoreError;
};

// Event count blew past the safety cap before the stopping rule was reached.
struct ExplosionSuspected : RestoreError {
    using RestoreError::RestoreError;
};

// Too few complete tours to form the requested estimate.
struct InsufficientData : RestoreError {
    using RestoreError::RestoreError;
};

// Rejection-sampling envelope violated: target exceeds M * proposal.
struct EnvelopeError : RestoreError {
    using RestoreError::RestoreError;
};

// The quadrature box does not contain the support of the minimal
// regeneration density.
struct BoxTooSmall : RestoreError {
    using RestoreError::RestoreError;
};

// The requested floor leaves the minimal regeneration density identically zero.
struct FloorTooLow : RestoreError {
    using RestoreError::RestoreError;
};

// Linear solve for the stationary vector failed (generator not irreducible).
struct RankError : RestoreError {
    using RestoreError::RestoreError;
};

// Invalid run configuration; carries one message per offending entry.
struct ConfigError : RestoreError {
    std::vector<std::string> issues;
    explicit ConfigError(std::vector<std::string> problems)
        : RestoreError(join(problems)), issues(std::move(problems)) {}
    explicit ConfigError(const std::string& problem)
        : ConfigError(std::vector<std::string>{problem}) {}

  private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = "configuration error";
        for (const auto& s : v) {
            out += "; ";
            out += s;
        }
        return out;
    }
};

// Rate values in [-kNegativeRateTol, 0) are treated as rounding noise.
inline constexpr double kNegativeRateTol = 1e-9;

// Clamp small negative rates to zero, reject genuinely negative ones.
inline double check_rate(double kappa, const char* where) {
    if (std::isnan(kappa))
        throw EvaluationError(std::string(where) + ": rate evaluated to NaN");
    if (kappa < -kNegativeRateTol)
        throw NegativeRateError(std::string(where) + ": regeneration rate " +
                                std::to_string(kappa) + " below -1e-9");
    return kappa < 0.0 ? 0.0 : kappa;
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return dot(a, a); }

}  // namespace restore
