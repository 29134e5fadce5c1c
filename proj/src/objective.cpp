#include "hosgd/objective.hpp"

#include <cmath>

#include "hosgd/rng.hpp"

namespace hosgd {

double Objective::full_eval(const ModelVector& x) const {
    const std::size_t K = num_samples();
    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k) acc += eval(x, k);
    return acc / static_cast<double>(K);
}

void Objective::full_grad(const ModelVector& x, ModelVector& out) const {
    const std::size_t K = num_samples();
    out.assign(dimension(), 0.0);
    ModelVector tmp;
    for (std::size_t k = 0; k < K; ++k) {
        grad(x, k, tmp);
        axpy(1.0, tmp, out);
    }
    scale(1.0 / static_cast<double>(K), out);
}

double empirical_sigma_sq(const Objective& obj, const ModelVector& x) {
    const std::size_t K = obj.num_samples();
    const ModelVector mean = obj.full_grad(x);
    ModelVector g;
    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        obj.grad(x, k, g);
        axpy(-1.0, mean, g);
        acc += norm_sq(g);
    }
    return acc / static_cast<double>(K);
}

double estimate_grad_lipschitz(const Objective& obj, int n_points, std::uint64_t key) {
    const std::size_t d = obj.dimension();
    const double eps = 1e-4;
    double max_norm = 0.0;
    ModelVector x(d), v(d), xp, xm, gp, gm;
    for (int p = 0; p < n_points; ++p) {
        const KeyStream point_stream(key, {static_cast<std::uint64_t>(Stream::probe),
                                           static_cast<std::uint64_t>(p), 0});
        const KeyStream dir_stream(key, {static_cast<std::uint64_t>(Stream::probe),
                                         static_cast<std::uint64_t>(p), 1});
        point_stream.fill_normals(x.data(), d, 0);
        dir_stream.fill_normals(v.data(), d, 0);
        double vn = norm(v);
        if (vn == 0.0) continue;
        scale(1.0 / vn, v);

        for (int it = 0; it < 20; ++it) {
            add_scaled(x, eps, v, xp);
            add_scaled(x, -eps, v, xm);
            obj.full_grad(xp, gp);
            obj.full_grad(xm, gm);
            axpy(-1.0, gm, gp);          // gp = grad(x+eps v) - grad(x-eps v)
            scale(1.0 / (2.0 * eps), gp);  // Hessian-vector product
            const double lambda = norm(gp);
            if (!(lambda > 1e-30)) break;
            max_norm = std::max(max_norm, lambda);
            scaled_copy(1.0 / lambda, gp, v);
        }
    }
    return 2.0 * max_norm;
}

}  // namespace hosgd
