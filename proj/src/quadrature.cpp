#include "restore/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace restore::quad {

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n < 3) n = 3;
    if (n % 2 == 0) ++n;
    const double h = (b - a) / (n - 1);
    double sum = f(a) + f(b);
    for (int i = 1; i < n - 1; ++i) sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

double simpson_box(const std::function<double(const Vec&)>& f, const Box& box, int n) {
    const int d = box.dim();
    if (d < 1 || d > 3) throw std::domain_error("simpson_box: dimension must be 1..3");
    if (d == 1) {
        return simpson([&](double x) { return f(Vec{x}); }, box.lo[0], box.hi[0], n);
    }
    if (d == 2) {
        return simpson(
            [&](double y) {
                return simpson([&](double x) { return f(Vec{x, y}); }, box.lo[0], box.hi[0], n);
            },
            box.lo[1], box.hi[1], n);
    }
    return simpson(
        [&](double z) {
            return simpson(
                [&](double y) {
                    return simpson([&](double x) { return f(Vec{x, y, z}); }, box.lo[0],
                                   box.hi[0], n);
                },
                box.lo[1], box.hi[1], n);
        },
        box.lo[2], box.hi[2], n);
}

double integrate_logdensity(const std::function<double(const Vec&)>& logf, Box box, int n,
                            double rel_tol) {
    auto f = [&](const Vec& x) {
        double v = logf(x);
        return std::isfinite(v) ? std::exp(v) : 0.0;
    };
    const int d = box.dim();
    double total = simpson_box(f, box, n);
    for (int round = 0; round < 40; ++round) {
        // Double the box and add the new shell, integrated directly as 2d
        // slabs at full grid resolution. Re-integrating the whole enlarged
        // box instead would lose the interior peaks once the box outgrows
        // the fixed point count.
        Box bigger = box;
        for (int k = 0; k < d; ++k) {
            double w = box.hi[k] - box.lo[k];
            bigger.lo[k] = box.lo[k] - 0.5 * w;
            bigger.hi[k] = box.hi[k] + 0.5 * w;
        }
        double shell = 0.0;
        for (int k = 0; k < d; ++k) {
            // Disjoint decomposition: along axis k take the two new slabs,
            // spanning the enlarged range on earlier axes and the old range
            // on later ones.
            Box slab;
            slab.lo.resize(static_cast<std::size_t>(d));
            slab.hi.resize(static_cast<std::size_t>(d));
            for (int j = 0; j < d; ++j) {
                auto uj = static_cast<std::size_t>(j);
                slab.lo[uj] = j < k ? bigger.lo[uj] : box.lo[uj];
                slab.hi[uj] = j < k ? bigger.hi[uj] : box.hi[uj];
            }
            auto uk = static_cast<std::size_t>(k);
            slab.lo[uk] = bigger.lo[uk];
            slab.hi[uk] = box.lo[uk];
            shell += simpson_box(f, slab, n);
            slab.lo[uk] = box.hi[uk];
            slab.hi[uk] = bigger.hi[uk];
            shell += simpson_box(f, slab, n);
        }
        box = bigger;
        total += shell;
        if (std::fabs(shell) <= rel_tol * std::fabs(total) && round >= 1) break;
    }
    return total;
}

}  // namespace restore::quad
