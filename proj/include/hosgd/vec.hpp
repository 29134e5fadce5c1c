#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

#include "hosgd/kernels.hpp"

namespace hosgd {

/// The model iterate x in R^d, and every gradient-shaped quantity.
using ModelVector = std::vector<double>;

inline double dot(const ModelVector& x, const ModelVector& y) {
    assert(x.size() == y.size());
    return kernels::active().dot(x.data(), y.data(), x.size());
}

inline double norm_sq(const ModelVector& x) {
    return kernels::active().sumsq(x.data(), x.size());
}

inline double norm(const ModelVector& x) { return std::sqrt(norm_sq(x)); }

/// y += a * x
inline void axpy(double a, const ModelVector& x, ModelVector& y) {
    assert(x.size() == y.size());
    kernels::active().axpy(a, x.data(), y.data(), x.size());
}

inline void scale(double a, ModelVector& x) {
    kernels::active().scale(a, x.data(), x.size());
}

/// out = a * x
inline void scaled_copy(double a, const ModelVector& x, ModelVector& out) {
    out.resize(x.size());
    kernels::active().scaled_copy(a, x.data(), out.data(), x.size());
}

/// out = x + a * y
inline void add_scaled(const ModelVector& x, double a, const ModelVector& y,
                       ModelVector& out) {
    assert(x.size() == y.size());
    out.resize(x.size());
    kernels::active().add_scaled(x.data(), a, y.data(), out.data(), x.size());
}

inline void fill_zero(ModelVector& x) { x.assign(x.size(), 0.0); }

inline bool all_finite(const ModelVector& x) {
    for (double v : x) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace hosgd
