#pragma once

#include <functional>

#include "restore/common.hpp"

namespace restore {

// Axis-aligned box in R^d.
struct Box {
    Vec lo;
    Vec hi;
    int dim() const { return static_cast<int>(lo.size()); }
};

namespace quad {

// Composite Simpson rule with n (odd, >= 3) points.
double simpson(const std::function<double(double)>& f, double a, double b, int n);

// Tensor-product Simpson over a box, d <= 3, n points per axis.
double simpson_box(const std::function<double(const Vec&)>& f, const Box& box, int n);

// Integral of exp(logf) over R^d, computed by Simpson on `start` and then
// doubling the box until the added shell contributes a relative tail below
// rel_tol. The integrand must decay; gives the normalizer of a log-density.
double integrate_logdensity(const std::function<double(const Vec&)>& logf, Box start, int n,
                            double rel_tol = 1e-9);

}  // namespace quad
}  // namespace restore
