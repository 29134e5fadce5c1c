#pragma once

// Independent gradient oracle for the test suites: central finite
// differences of Objective::eval, never touching Objective::grad.

#include <cstdint>
#include <functional>

#include "hosgd/objective.hpp"
#include "hosgd/rng.hpp"

namespace hosgd::testsupport {

inline ModelVector fd_gradient(const Objective& obj, const ModelVector& x,
                               std::size_t sample, double h = 1e-6) {
    ModelVector g(x.size());
    ModelVector xp = x, xm = x;
    for (std::size_t j = 0; j < x.size(); ++j) {
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        g[j] = (obj.eval(xp, sample) - obj.eval(xm, sample)) / (2.0 * h);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return g;
}

inline double rel_grad_error(const Objective& obj, const ModelVector& x,
                             std::size_t sample, double h = 1e-6) {
    const ModelVector fd = fd_gradient(obj, x, sample, h);
    ModelVector an;
    obj.grad(x, sample, an);
    ModelVector diff = an;
    axpy(-1.0, fd, diff);
    return norm(diff) / std::max(norm(an), 1e-8);
}

/// Max relative analytic-vs-FD error over n random (x, sample) pairs.
/// `accept` may veto points (e.g. near a kink); vetoed points are redrawn.
inline double max_grad_check_error(
    const Objective& obj, int n_points, std::uint64_t key, double h = 1e-6,
    double x_scale = 1.0,
    const std::function<bool(const ModelVector&, std::size_t)>& accept = nullptr) {
    const std::size_t d = obj.dimension();
    double worst = 0.0;
    int checked = 0;
    for (std::uint64_t p = 0; checked < n_points && p < 50u * static_cast<unsigned>(n_points);
         ++p) {
        const KeyStream xs(key, {static_cast<std::uint64_t>(Stream::probe), p, 11});
        ModelVector x(d);
        xs.fill_normals(x.data(), d, 0);
        scale(x_scale, x);
        std::uint64_t c = 0;
        const std::size_t sample =
            static_cast<std::size_t>(xs.bounded(c, obj.num_samples()));
        if (accept && !accept(x, sample)) continue;
        worst = std::max(worst, rel_grad_error(obj, x, sample, h));
        ++checked;
    }
    return worst;
}

}  // namespace hosgd::testsupport
