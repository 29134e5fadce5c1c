#include "hosgd/rng.hpp"

#include <cassert>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace hosgd {
namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

KeyStream::KeyStream(std::uint64_t seed, std::initializer_list<std::uint64_t> words)
    : key_(seed) {
    for (std::uint64_t w : words) key_ = mix64((key_ + kGamma) ^ w);
}

std::uint64_t KeyStream::word(std::uint64_t counter) const {
    return mix64(key_ + (counter + 1) * kGamma);
}

double KeyStream::unit_open(std::uint64_t counter) const {
    return static_cast<double>((word(counter) >> 11) + 1) * 0x1.0p-53;
}

double KeyStream::normal(std::uint64_t counter) const {
    const std::uint64_t pair = counter >> 1;
    const double u1 = unit_open(2 * pair);
    const double u2 = unit_open(2 * pair + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    return (counter & 1) == 0 ? r * std::cos(kTwoPi * u2) : r * std::sin(kTwoPi * u2);
}

void KeyStream::fill_normals(double* out, std::size_t n, std::uint64_t base) const {
    assert((base & 1) == 0 && "normal blocks start at even counters");
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const double u1 = unit_open(base + i);
        const double u2 = unit_open(base + i + 1);
        const double r = std::sqrt(-2.0 * std::log(u1));
        out[i] = r * std::cos(kTwoPi * u2);
        out[i + 1] = r * std::sin(kTwoPi * u2);
    }
    if (i < n) out[i] = normal(base + i);
}

std::uint64_t KeyStream::bounded(std::uint64_t& counter, std::uint64_t bound) const {
    assert(bound >= 1);
    // Lemire's multiply-then-reject scheme: exact uniformity over {0..bound-1}.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t x = word(counter++);
        const unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
        if (static_cast<std::uint64_t>(m) >= threshold) {
            return static_cast<std::uint64_t>(m >> 64);
        }
    }
}

SeedRegistry::SeedRegistry(std::uint64_t master_seed, std::size_t dimension)
    : master_seed_(master_seed), dimension_(dimension) {
    if (dimension_ < 1) throw std::invalid_argument("SeedRegistry: dimension must be >= 1");
}

void SeedRegistry::direction_into(long t, int worker, ModelVector& out) const {
    assert(t >= 0 && worker >= 1);
    out.resize(dimension_);
    const KeyStream stream(master_seed_,
                           {static_cast<std::uint64_t>(Stream::direction),
                            static_cast<std::uint64_t>(t),
                            static_cast<std::uint64_t>(worker)});
    // Counter block per attempt, even-aligned so normals pair up identically
    // whatever d is.
    const std::uint64_t block = static_cast<std::uint64_t>(dimension_ + (dimension_ & 1));
    for (std::uint64_t attempt = 0;; ++attempt) {
        stream.fill_normals(out.data(), dimension_, attempt * block);
        const double nsq = norm_sq(out);
        if (nsq > 0.0) {
            scale(testhook::sphere_scale() / std::sqrt(nsq), out);
            return;
        }
        // All d normals underflowed to zero: probability 0 in exact
        // arithmetic; take the next counter block.
    }
}

ModelVector SeedRegistry::direction(long t, int worker) const {
    ModelVector out;
    direction_into(t, worker, out);
    return out;
}

ModelVector sample_unit_sphere(const SeedRegistry& registry, long t, int worker) {
    return registry.direction(t, worker);
}

SampleBatch draw_batch(std::uint64_t master_seed, long t, int worker,
                       int batch_size, std::size_t num_samples) {
    assert(batch_size >= 1 && num_samples >= 1);
    SampleBatch batch;
    batch.indices.resize(static_cast<std::size_t>(batch_size));
    for (int b = 0; b < batch_size; ++b) {
        const KeyStream stream(master_seed,
                               {static_cast<std::uint64_t>(Stream::batch),
                                static_cast<std::uint64_t>(t),
                                static_cast<std::uint64_t>(worker),
                                static_cast<std::uint64_t>(b)});
        std::uint64_t counter = 0;
        batch.indices[static_cast<std::size_t>(b)] =
            static_cast<std::size_t>(stream.bounded(counter, num_samples));
    }
    return batch;
}

namespace testhook {

double sphere_scale() {
    static const double scale = [] {
        if (const char* env = std::getenv("HOSGD_TEST_SPHERE_SCALE")) {
            return std::strtod(env, nullptr);
        }
        return 1.0;
    }();
    return scale;
}

}  // namespace testhook

}  // namespace hosgd
