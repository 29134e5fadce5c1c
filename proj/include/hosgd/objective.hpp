#pragma once

#include <cstdint>
#include <cstddef>

#include "hosgd/vec.hpp"

namespace hosgd {

/// A stochastic finite-sum objective f(x) = (1/K) sum_k F(x, k).
///
/// eval and grad are pure functions of (x, sample index); implementations
/// must be safe to call concurrently.
class Objective {
public:
    virtual ~Objective() = default;

    virtual double eval(const ModelVector& x, std::size_t sample) const = 0;
    virtual void grad(const ModelVector& x, std::size_t sample, ModelVector& out) const = 0;

    virtual std::size_t num_samples() const = 0;
    virtual std::size_t dimension() const = 0;

    /// Estimate (or exact value) of the gradient Lipschitz constant.
    virtual double lipschitz_estimate() const = 0;
    /// A lower bound on the objective value.
    virtual double f_star_estimate() const = 0;

    ModelVector grad(const ModelVector& x, std::size_t sample) const {
        ModelVector out;
        grad(x, sample, out);
        return out;
    }

    /// f(x): mean of per-sample values, summed in ascending sample order.
    double full_eval(const ModelVector& x) const;

    /// grad f(x): mean of per-sample gradients, ascending sample order.
    void full_grad(const ModelVector& x, ModelVector& out) const;
    ModelVector full_grad(const ModelVector& x) const {
        ModelVector out;
        full_grad(x, out);
        return out;
    }
};

/// Empirical per-sample gradient variance at x:
/// (1/K) sum_k ||grad F(x,k) - grad f(x)||^2. This is the tightest valid
/// instantiation of the sigma^2 bound at a single point.
double empirical_sigma_sq(const Objective& obj, const ModelVector& x);

/// Numerical gradient-Lipschitz estimate: at n_points random points, runs
/// power iteration on the Hessian (via central differences of the full
/// gradient) and returns twice the largest spectral norm seen.
double estimate_grad_lipschitz(const Objective& obj, int n_points, std::uint64_t key);

}  // namespace hosgd
