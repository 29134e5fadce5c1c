// AVX2 kernels. This translation unit is compiled with -mavx2; it is only
// entered after a runtime CPU check, so the rest of the binary stays
// portable to non-AVX2 x86-64.
//
// Bit-identity with the scalar reference is load-bearing (kernels.hpp):
// vector lanes carry the four interleaved partial sums of the reference
// reduction, tails fall back to the same acc[i mod 4] scheme, and FMA is
// never used (mul + add round separately, exactly like the scalar path).

#include "hosgd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define HOSGD_HAVE_AVX2_TU 1
#include <immintrin.h>
#else
#define HOSGD_HAVE_AVX2_TU 0
#endif

namespace hosgd::kernels {

#if HOSGD_HAVE_AVX2_TU

namespace {

inline double combine4(__m256d vacc, const double* x, const double* y,
                       std::size_t tail_begin, std::size_t n) {
    alignas(32) double acc[4];
    _mm256_store_pd(acc, vacc);
    if (y != nullptr) {
        for (std::size_t i = tail_begin; i < n; ++i) acc[i & 3] += x[i] * y[i];
    } else {
        for (std::size_t i = tail_begin; i < n; ++i) acc[i & 3] += x[i] * x[i];
    }
    return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d vacc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        __m256d vy = _mm256_loadu_pd(y + i);
        vacc = _mm256_add_pd(vacc, _mm256_mul_pd(vx, vy));
    }
    return combine4(vacc, x, y, i, n);
}

double sumsq_avx2(const double* x, std::size_t n) {
    __m256d vacc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        vacc = _mm256_add_pd(vacc, _mm256_mul_pd(vx, vx));
    }
    return combine4(vacc, x, nullptr, i, n);
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        __m256d vx = _mm256_loadu_pd(x + i);
        vy = _mm256_add_pd(vy, _mm256_mul_pd(va, vx));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale_avx2(double a, double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), va));
    }
    for (; i < n; ++i) x[i] *= a;
}

void scaled_copy_avx2(double a, const double* x, double* out, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) out[i] = a * x[i];
}

void add_scaled_avx2(const double* x, double a, const double* y, double* out,
                     std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        __m256d vy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(out + i, _mm256_add_pd(vx, _mm256_mul_pd(va, vy)));
    }
    for (; i < n; ++i) out[i] = x[i] + a * y[i];
}

}  // namespace

const Backend* avx2_backend() {
    static const Backend backend = {
        "avx2",     dot_avx2,   sumsq_avx2,       axpy_avx2,
        scale_avx2, scaled_copy_avx2, add_scaled_avx2,
    };
    return &backend;
}

#else

const Backend* avx2_backend() { return nullptr; }

#endif  // HOSGD_HAVE_AVX2_TU

}  // namespace hosgd::kernels
