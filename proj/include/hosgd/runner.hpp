#pragma once

#include <vector>

#include "hosgd/config.hpp"
#include "hosgd/message.hpp"
#include "hosgd/objective.hpp"
#include "hosgd/rng.hpp"
#include "hosgd/trajectory.hpp"

namespace hosgd {

/// (1/B) sum_b grad F(x, batch_b), summed in batch order.
ModelVector fo_gradient_estimate(const Objective& obj, const ModelVector& x,
                                 const SampleBatch& batch);

struct ZoEstimate {
    double coefficient = 0.0;  // (1/B) sum_b (d/mu) [F(x + mu v, b) - F(x, b)]
    ModelVector vector;        // coefficient * v
};

/// Two function evaluations per batch sample, no gradient calls. Throws
/// NonFiniteError if the objective returns NaN/Inf.
ZoEstimate zo_gradient_estimate(const Objective& obj, const ModelVector& x,
                                const SampleBatch& batch, const ModelVector& direction,
                                double mu);

/// Mean of the per-worker contributions, reduced in ascending sender order
/// (floating-point addition is not associative; a fixed order is what makes
/// equal configs give bit-identical trajectories). Zeroth-order messages
/// are expanded to payload_scalar * direction(t+1, sender) locally.
/// Throws ProtocolError on mixed kinds, duplicate senders, or an empty round.
ModelVector aggregate(const std::vector<GradientMessage>& messages,
                      const SeedRegistry& registry);

/// How zeroth-order contributions travel. `vector_shadow` transmits the
/// full d-vector instead of the scalar: an oracle used to demonstrate the
/// scalar exchange is lossless, with communication *accounted* as scalars
/// either way.
enum class ZoTransport { scalar, vector_shadow };

struct RunOptions {
    /// Record every `record_stride`-th iteration plus the final one;
    /// 0 selects 1 for N <= 10^4 and ceil(N/10^4) above.
    long record_stride = 0;
    ZoTransport transport = ZoTransport::scalar;
};

long resolve_record_stride(long requested, long N);

/// Effective constant step size for a config (the theorem default reads L
/// from the supplied constants).
double resolve_step_size(const RunConfig& config, const AssumptionConstants& constants);

/// Algorithm 1: first-order rounds when mod(t, tau) = 0, zeroth-order
/// scalar rounds otherwise, aggregation, update x^{t+1} = x^t - alpha G.
Trajectory run_hosgd(const RunConfig& config, const Objective& obj,
                     const AssumptionConstants& constants, const RunOptions& opts = {});

/// First-order branch at every iteration; kept as an independent code path
/// so it can serve as the tau = 1 equivalence oracle.
Trajectory run_sync_sgd(const RunConfig& config, const Objective& obj,
                        const AssumptionConstants& constants, const RunOptions& opts = {});

/// Zeroth-order branch at every iteration, including t = 0.
Trajectory run_zo_sgd(const RunConfig& config, const Objective& obj,
                      const AssumptionConstants& constants, const RunOptions& opts = {});

/// Periodic model averaging: local first-order steps, models replaced by
/// their mean whenever mod(t+1, tau) = 0 (m*d scalars per averaging round).
/// Records track the mean of the local models.
Trajectory run_local_avg(const RunConfig& config, const Objective& obj,
                         const AssumptionConstants& constants, const RunOptions& opts = {});

/// Dispatch on config.algorithm.
Trajectory run(const RunConfig& config, const Objective& obj,
               const AssumptionConstants& constants, const RunOptions& opts = {});

/// Average scalars per worker per iteration: (tau - 1 + d) / tau.
double comm_load_per_iteration(std::size_t d, int tau);

}  // namespace hosgd
