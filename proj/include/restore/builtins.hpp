#pragma once

#include <vector>

#include "restore/model.hpp"

namespace restore {

// Normalized Gaussian target with independent coordinates.
TargetModel gaussian_target(const Vec& mean, const Vec& sd);

// 1-d Gaussian mixture, normalized; weights need not sum to one.
TargetModel gaussian_mixture_target(const std::vector<double>& weights,
                                    const std::vector<double>& means,
                                    const std::vector<double>& sds);

// 1-d posterior of a location parameter under unit-scale Cauchy noise with a
// flat prior: log pibar(x) = -sum log(1 + (x - y_i)^2). Unnormalized.
TargetModel cauchy_posterior_target(const std::vector<double>& observations);

// 1-d target tabulated as (x, log pibar) knots, evaluated by a natural cubic
// spline; derivatives come from the spline coefficients. Evaluation outside
// the knot range is an EvaluationError.
TargetModel custom_grid_target(const std::vector<double>& xs, const std::vector<double>& logps);

// Regeneration distributions matching the builtin targets.
RegenDistribution gaussian_regen(const Vec& mean, const Vec& sd, double C);
RegenDistribution gaussian_mixture_regen(const std::vector<double>& weights,
                                         const std::vector<double>& means,
                                         const std::vector<double>& sds, double C);

}  // namespace restore
