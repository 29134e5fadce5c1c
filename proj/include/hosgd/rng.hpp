#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

#include "hosgd/vec.hpp"

namespace hosgd {

/// Counter-based deterministic randomness.
///
/// Every random quantity in a run is a pure function of (master seed, a
/// stream tag, a few key words, a counter). Nothing carries generator
/// state, so any party (a worker, the aggregator reconstructing a
/// direction from a one-scalar message, a Monte-Carlo loop running in
/// parallel) recomputes identical bits from the same key.
///
/// Exact derivation, so that independent implementations agree:
///   mix64(z): the SplitMix64 finalizer
///       z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9;
///       z ^= z >> 27;  z *= 0x94D049BB133111EB;
///       z ^= z >> 31;
///   key absorption (all math mod 2^64), GAMMA = 0x9E3779B97F4A7C15:
///       h = master_seed
///       for each key word w:  h = mix64((h + GAMMA) ^ w)
///   raw word c of the stream:  word(c) = mix64(h + (c + 1) * GAMMA)
///   uniform (0,1]:  unit_open(c) = ((word(c) >> 11) + 1) * 2^-53
///   standard normals come in Box-Muller pairs; for pair p:
///       u1 = unit_open(2p), u2 = unit_open(2p+1), r = sqrt(-2 ln u1)
///       normal(2p) = r * cos(2*pi*u2),  normal(2p+1) = r * sin(2*pi*u2)
class KeyStream {
public:
    KeyStream(std::uint64_t seed, std::initializer_list<std::uint64_t> words);

    std::uint64_t word(std::uint64_t counter) const;
    double unit_open(std::uint64_t counter) const;
    double normal(std::uint64_t counter) const;

    /// n consecutive normals starting at an even counter.
    void fill_normals(double* out, std::size_t n, std::uint64_t base_counter) const;

    /// Unbiased draw from {0, ..., bound-1}. May consume several raw words;
    /// `counter` is advanced past the words used.
    std::uint64_t bounded(std::uint64_t& counter, std::uint64_t bound) const;

private:
    std::uint64_t key_;
};

/// Stream tags keep unrelated uses of one master seed statistically
/// disjoint. Values are part of the documented layout; do not renumber.
enum class Stream : std::uint64_t {
    direction = 1,  // per-(t, worker) unit-sphere directions
    batch = 2,      // per-(t, worker, slot) sample indices
    data = 3,       // synthetic dataset generation
    ball = 4,       // unit-ball draws (analysis)
    mc = 5,         // Monte-Carlo estimator draws (analysis)
    init = 6,       // x0 initialization
    probe = 7,      // random evaluation points (L estimation, checks)
};

/// Deterministic map (master_seed, t, worker) -> unit-sphere direction,
/// pre-shared by construction: every party holding the master seed can
/// reconstruct any direction without communication.
///
/// direction(t, i) draws d standard normals from the stream keyed by
/// (Stream::direction, t, i) at counters 0..d-1 and multiplies by the
/// reciprocal of the Euclidean norm, once. If the norm underflows to zero
/// the draw restarts at the next aligned counter block.
class SeedRegistry {
public:
    SeedRegistry(std::uint64_t master_seed, std::size_t dimension);

    ModelVector direction(long t, int worker) const;
    void direction_into(long t, int worker, ModelVector& out) const;

    std::uint64_t master_seed() const { return master_seed_; }
    std::size_t dimension() const { return dimension_; }

private:
    std::uint64_t master_seed_;
    std::size_t dimension_;
};

/// Uniform unit-sphere draw for worker `worker` at iteration index t.
/// Precondition: t >= 0, worker >= 1.
ModelVector sample_unit_sphere(const SeedRegistry& registry, long t, int worker);

/// Sample identifiers for one worker-iteration, i.i.d. uniform with
/// replacement over {0, ..., num_samples-1}, keyed by
/// (master_seed, Stream::batch, t, worker, slot).
struct SampleBatch {
    std::vector<std::size_t> indices;
};

SampleBatch draw_batch(std::uint64_t master_seed, long t, int worker,
                       int batch_size, std::size_t num_samples);

namespace testhook {
/// Scale factor applied to every sphere draw; 1.0 unless the environment
/// variable HOSGD_TEST_SPHERE_SCALE is set. Exists so `hosgd verify` can be
/// shown to catch a broken sampler; never set it outside tests.
double sphere_scale();
}  // namespace testhook

}  // namespace hosgd
