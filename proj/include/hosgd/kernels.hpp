#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace hosgd::kernels {

/// Dense double-precision inner-loop kernels, selectable at runtime.
///
/// Every backend implements the same *fixed* floating-point operation
/// order, so results are bit-identical across backends and machines:
///   - elementwise kernels (axpy, scale, scaled_copy, add_scaled) perform
///     one IEEE multiply followed by one IEEE add per element, never a
///     fused multiply-add;
///   - reductions (dot, sumsq) accumulate into four interleaved partial
///     sums, acc[i mod 4] += x[i]*y[i], combined as (acc0+acc1)+(acc2+acc3).
/// The AVX2 backend maps the four partial sums onto the four lanes of a
/// 256-bit register, which reproduces the scalar reference bit for bit.
/// This is a contract, not an optimization detail: the trajectory
/// determinism and the scalar-exchange equivalence tests depend on it.
struct Backend {
    const char* name;

    double (*dot)(const double* x, const double* y, std::size_t n);
    double (*sumsq)(const double* x, std::size_t n);

    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // x[i] *= a
    void (*scale)(double a, double* x, std::size_t n);
    // out[i] = a * x[i]
    void (*scaled_copy)(double a, const double* x, double* out, std::size_t n);
    // out[i] = x[i] + a * y[i]
    void (*add_scaled)(const double* x, double a, const double* y, double* out,
                       std::size_t n);
};

const Backend& scalar_backend();

/// AVX2 backend, or nullptr when the target architecture has no AVX2 build.
const Backend* avx2_backend();

/// The backend in use. Default selection: the HOSGD_KERNELS environment
/// variable ("scalar", "avx2", "auto") if set, otherwise the widest backend
/// the CPU supports.
const Backend& active();

/// Force a backend by name (tests). Returns false if the name is unknown or
/// the backend is unavailable on this CPU.
bool set_active(std::string_view name);

std::vector<const Backend*> available_backends();

}  // namespace hosgd::kernels
