#include "hosgd/kernels.hpp"

// Reference kernels. The reduction order here *defines* the contract the
// SIMD backends must reproduce exactly (see kernels.hpp).

namespace hosgd::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) acc[i & 3] += x[i] * y[i];
    return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

double sumsq_scalar(const double* x, std::size_t n) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) acc[i & 3] += x[i] * x[i];
    return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void scaled_copy_scalar(double a, const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i];
}

void add_scaled_scalar(const double* x, double a, const double* y, double* out,
                       std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + a * y[i];
}

}  // namespace

const Backend& scalar_backend() {
    static const Backend backend = {
        "scalar",     dot_scalar,         sumsq_scalar,
        axpy_scalar,  scale_scalar,       scaled_copy_scalar,
        add_scaled_scalar,
    };
    return backend;
}

}  // namespace hosgd::kernels
