#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <random>
#include <vector>

#include "hosgd/kernels.hpp"

using hosgd::kernels::Backend;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = normal(rng);
    return v;
}

bool same_bits(double a, double b) {
    return std::memcmp(&a, &b, sizeof(double)) == 0;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    return a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("reduction order contract of the scalar reference") {
    // dot must equal the documented 4-way blocked sum exactly.
    std::mt19937_64 rng(7);
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 64u, 65u, 129u}) {
        auto x = random_vec(rng, n);
        auto y = random_vec(rng, n);
        double acc[4] = {0, 0, 0, 0};
        for (std::size_t i = 0; i < n; ++i) acc[i & 3] += x[i] * y[i];
        const double expected = (acc[0] + acc[1]) + (acc[2] + acc[3]);
        const Backend& s = hosgd::kernels::scalar_backend();
        CHECK(same_bits(s.dot(x.data(), y.data(), n), expected));
        // sumsq is dot(x, x) by construction
        CHECK(same_bits(s.sumsq(x.data(), n), s.dot(x.data(), x.data(), n)));
    }
}

TEST_CASE("elementwise kernels round multiply and add separately") {
    std::mt19937_64 rng(11);
    const double a = 0.3330367;
    for (std::size_t n : {1u, 5u, 16u, 33u}) {
        auto x = random_vec(rng, n);
        auto y = random_vec(rng, n);
        auto y2 = y;
        hosgd::kernels::scalar_backend().axpy(a, x.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) {
            const double prod = a * x[i];
            CHECK(same_bits(y2[i], y[i] + prod));
        }
    }
}

TEST_CASE("simd backends are bit-identical to the scalar reference") {
    const Backend& ref = hosgd::kernels::scalar_backend();
    auto backends = hosgd::kernels::available_backends();
    if (backends.size() == 1) {
        MESSAGE("no SIMD backend available on this CPU; reference only");
        return;
    }
    std::mt19937_64 rng(42);
    for (const Backend* b : backends) {
        if (b == &ref) continue;
        CAPTURE(b->name);
        for (std::size_t n = 0; n <= 70; ++n) {
            auto x = random_vec(rng, n);
            auto y = random_vec(rng, n);
            CHECK(same_bits(b->dot(x.data(), y.data(), n), ref.dot(x.data(), y.data(), n)));
            CHECK(same_bits(b->sumsq(x.data(), n), ref.sumsq(x.data(), n)));

            const double a = -1.7730039;
            auto y_ref = y;
            auto y_simd = y;
            ref.axpy(a, x.data(), y_ref.data(), n);
            b->axpy(a, x.data(), y_simd.data(), n);
            CHECK(same_bits(y_ref, y_simd));

            auto x_ref = x;
            auto x_simd = x;
            ref.scale(a, x_ref.data(), n);
            b->scale(a, x_simd.data(), n);
            CHECK(same_bits(x_ref, x_simd));

            std::vector<double> out_ref(n), out_simd(n);
            ref.scaled_copy(a, x.data(), out_ref.data(), n);
            b->scaled_copy(a, x.data(), out_simd.data(), n);
            CHECK(same_bits(out_ref, out_simd));

            ref.add_scaled(x.data(), a, y.data(), out_ref.data(), n);
            b->add_scaled(x.data(), a, y.data(), out_simd.data(), n);
            CHECK(same_bits(out_ref, out_simd));
        }
    }
}

TEST_CASE("dot agrees with extended-precision accumulation") {
    std::mt19937_64 rng(3);
    auto x = random_vec(rng, 999);
    auto y = random_vec(rng, 999);
    long double exact = 0.0L;
    for (std::size_t i = 0; i < x.size(); ++i) {
        exact += static_cast<long double>(x[i]) * static_cast<long double>(y[i]);
    }
    const double got = hosgd::kernels::scalar_backend().dot(x.data(), y.data(), x.size());
    CHECK(std::abs(got - static_cast<double>(exact)) < 1e-10);
}

TEST_CASE("backend selection") {
    CHECK(hosgd::kernels::set_active("scalar"));
    CHECK(std::string(hosgd::kernels::active().name) == "scalar");
    CHECK_FALSE(hosgd::kernels::set_active("no-such-backend"));
    // Restore the default choice for other tests in this binary.
    for (const Backend* b : hosgd::kernels::available_backends()) {
        hosgd::kernels::set_active(b->name);
    }
}
