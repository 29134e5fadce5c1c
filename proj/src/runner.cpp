#include "hosgd/runner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hosgd {
namespace {

struct Counters {
    std::uint64_t scalars = 0;
    std::uint64_t fevals = 0;
    std::uint64_t gevals = 0;
};

struct Recorder {
    const Objective& obj;
    Trajectory& traj;
    Counters counters;
    ModelVector gbuf;

    /// False when the full loss or gradient norm overflows: the iterate may
    /// still be finite, but the trajectory is no longer reportable.
    bool record(long t, const ModelVector& x) {
        TrajectoryRecord r;
        r.t = t;
        r.loss = obj.full_eval(x);
        obj.full_grad(x, gbuf);
        r.grad_norm_sq = norm_sq(gbuf);
        if (!std::isfinite(r.loss) || !std::isfinite(r.grad_norm_sq)) {
            traj.diverged = true;
            traj.error = "non-finite loss or gradient norm at iteration " + std::to_string(t);
            return false;
        }
        r.scalars_sent_cum = counters.scalars;
        r.fevals_cum = counters.fevals;
        r.gevals_cum = counters.gevals;
        traj.records.push_back(r);
        return true;
    }
};

void check_run_inputs(const RunConfig& config, const Objective& obj,
                      const AssumptionConstants& constants) {
    config.validate();
    constants.validate();
    if (obj.dimension() != config.d) {
        throw std::invalid_argument("run: objective dimension " +
                                    std::to_string(obj.dimension()) +
                                    " != config d " + std::to_string(config.d));
    }
}

void add_theorem_warnings(const RunConfig& config, Trajectory& traj) {
    if (config.step.kind != StepSchedule::Kind::theorem_default) return;
    const std::uint64_t n_min = min_iterations(config.d, config.B, config.m);
    if (static_cast<std::uint64_t>(config.N) <= n_min) {
        traj.warnings.push_back(
            "N = " + std::to_string(config.N) +
            " is at or below the minimum iteration count " + std::to_string(n_min) +
            " required by the step-size analysis; proceeding anyway");
    }
    const double mu_max = mu_default(config.d, config.N);
    if (config.mu > mu_max) {
        traj.warnings.push_back("mu = " + std::to_string(config.mu) +
                                " exceeds the admissible 1/sqrt(dN) = " +
                                std::to_string(mu_max) + "; proceeding anyway");
    }
}

ModelVector mean_ascending(const std::vector<ModelVector>& contributions) {
    ModelVector acc(contributions.front().size(), 0.0);
    for (const ModelVector& v : contributions) axpy(1.0, v, acc);
    scale(1.0 / static_cast<double>(contributions.size()), acc);
    return acc;
}

}  // namespace

long resolve_record_stride(long requested, long N) {
    if (requested > 0) return requested;
    return N > 10000 ? (N + 9999) / 10000 : 1;
}

double resolve_step_size(const RunConfig& config, const AssumptionConstants& constants) {
    if (config.step.kind == StepSchedule::Kind::constant) return config.step.alpha;
    return step_size_default(config.B, config.m, constants.L, config.N);
}

ModelVector fo_gradient_estimate(const Objective& obj, const ModelVector& x,
                                 const SampleBatch& batch) {
    ModelVector acc(x.size(), 0.0);
    ModelVector tmp;
    for (std::size_t idx : batch.indices) {
        obj.grad(x, idx, tmp);
        axpy(1.0, tmp, acc);
    }
    scale(1.0 / static_cast<double>(batch.indices.size()), acc);
    return acc;
}

ZoEstimate zo_gradient_estimate(const Objective& obj, const ModelVector& x,
                                const SampleBatch& batch, const ModelVector& direction,
                                double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("zo_gradient_estimate: mu must be > 0");
    ModelVector shifted;
    add_scaled(x, mu, direction, shifted);
    const double d_over_mu = static_cast<double>(x.size()) / mu;
    double acc = 0.0;
    for (std::size_t idx : batch.indices) {
        const double f_shifted = obj.eval(shifted, idx);
        const double f_base = obj.eval(x, idx);
        if (!std::isfinite(f_shifted) || !std::isfinite(f_base)) {
            throw NonFiniteError("objective returned a non-finite value at sample " +
                                 std::to_string(idx));
        }
        acc += d_over_mu * (f_shifted - f_base);
    }
    ZoEstimate est;
    est.coefficient = acc / static_cast<double>(batch.indices.size());
    scaled_copy(est.coefficient, direction, est.vector);
    return est;
}

ModelVector aggregate(const std::vector<GradientMessage>& messages,
                      const SeedRegistry& registry) {
    if (messages.empty()) throw ProtocolError("aggregate: empty round");
    const GradientMessage::Kind kind = messages.front().kind;
    const long t = messages.front().iteration;
    std::vector<const GradientMessage*> ordered;
    ordered.reserve(messages.size());
    for (const GradientMessage& msg : messages) {
        if (msg.kind != kind) {
            throw ProtocolError("aggregate: mixed message kinds at iteration " +
                                std::to_string(t));
        }
        if (msg.iteration != t) {
            throw ProtocolError("aggregate: messages from different iterations");
        }
        ordered.push_back(&msg);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const GradientMessage* a, const GradientMessage* b) {
                  return a->sender < b->sender;
              });
    for (std::size_t i = 1; i < ordered.size(); ++i) {
        if (ordered[i]->sender == ordered[i - 1]->sender) {
            throw ProtocolError("aggregate: duplicate sender " +
                                std::to_string(ordered[i]->sender));
        }
    }

    const double inv_m = 1.0 / static_cast<double>(messages.size());
    if (kind == GradientMessage::Kind::first_order) {
        ModelVector acc(ordered.front()->payload_vector.size(), 0.0);
        for (const GradientMessage* msg : ordered) {
            if (msg->payload_vector.size() != acc.size()) {
                throw ProtocolError("aggregate: payload dimension mismatch");
            }
            axpy(1.0, msg->payload_vector, acc);
        }
        scale(inv_m, acc);
        return acc;
    }
    ModelVector acc(registry.dimension(), 0.0);
    ModelVector dir;
    for (const GradientMessage* msg : ordered) {
        registry.direction_into(t + 1, msg->sender, dir);
        axpy(msg->payload_scalar, dir, acc);
    }
    scale(inv_m, acc);
    return acc;
}

namespace {

// One first-order round shared verbatim by every algorithm that takes it.
ModelVector fo_round(const RunConfig& config, const Objective& obj,
                     const SeedRegistry& registry, const ModelVector& x, long t,
                     Counters& counters) {
    std::vector<GradientMessage> messages;
    messages.reserve(static_cast<std::size_t>(config.m));
    for (int i = 1; i <= config.m; ++i) {
        const SampleBatch batch =
            draw_batch(config.master_seed, t, i, config.B, obj.num_samples());
        GradientMessage msg;
        msg.kind = GradientMessage::Kind::first_order;
        msg.sender = i;
        msg.iteration = t;
        msg.payload_vector = fo_gradient_estimate(obj, x, batch);
        counters.gevals += static_cast<std::uint64_t>(config.B);
        messages.push_back(std::move(msg));
    }
    counters.scalars += static_cast<std::uint64_t>(config.m) * config.d;
    return aggregate(messages, registry);
}

// One zeroth-order round; transport picks the scalar protocol or the
// vector-transmitting shadow. Accounting is the protocol's either way.
ModelVector zo_round(const RunConfig& config, const Objective& obj,
                     const SeedRegistry& registry, const ModelVector& x, long t,
                     ZoTransport transport, Counters& counters) {
    std::vector<GradientMessage> messages;
    std::vector<ModelVector> shadow_vectors;
    for (int i = 1; i <= config.m; ++i) {
        const SampleBatch batch =
            draw_batch(config.master_seed, t, i, config.B, obj.num_samples());
        const ModelVector v = registry.direction(t + 1, i);
        ZoEstimate est = zo_gradient_estimate(obj, x, batch, v, config.mu);
        counters.fevals += 2ull * static_cast<std::uint64_t>(config.B);
        if (transport == ZoTransport::scalar) {
            GradientMessage msg;
            msg.kind = GradientMessage::Kind::zeroth_order;
            msg.sender = i;
            msg.iteration = t;
            msg.payload_scalar = est.coefficient;
            messages.push_back(std::move(msg));
        } else {
            shadow_vectors.push_back(std::move(est.vector));
        }
    }
    counters.scalars += static_cast<std::uint64_t>(config.m);
    if (transport == ZoTransport::scalar) return aggregate(messages, registry);
    return mean_ascending(shadow_vectors);
}

bool apply_update(ModelVector& x, double alpha, const ModelVector& g,
                  ModelVector& scratch) {
    scratch = x;
    axpy(-alpha, g, scratch);
    if (!all_finite(scratch)) return false;
    x.swap(scratch);
    return true;
}

}  // namespace

Trajectory run_hosgd(const RunConfig& config, const Objective& obj,
                     const AssumptionConstants& constants, const RunOptions& opts) {
    check_run_inputs(config, obj, constants);
    const double alpha = resolve_step_size(config, constants);
    const long stride = resolve_record_stride(opts.record_stride, config.N);
    const SeedRegistry registry(config.master_seed, config.d);

    Trajectory traj;
    add_theorem_warnings(config, traj);
    Recorder recorder{obj, traj, {}, {}};
    ModelVector x = config.x0;
    ModelVector scratch;
    bool alive = recorder.record(0, x);
    for (long t = 0; alive && t < config.N; ++t) {
        ModelVector g;
        try {
            g = (t % config.tau == 0)
                    ? fo_round(config, obj, registry, x, t, recorder.counters)
                    : zo_round(config, obj, registry, x, t, opts.transport,
                               recorder.counters);
        } catch (const NonFiniteError& e) {
            traj.diverged = true;
            traj.error = std::string(e.what()) + " (iteration " + std::to_string(t) + ")";
            break;
        }
        if (!apply_update(x, alpha, g, scratch)) {
            traj.diverged = true;
            traj.error = "non-finite iterate after update at iteration " + std::to_string(t);
            break;
        }
        traj.iterations_run = t + 1;
        if ((t + 1) % stride == 0 || t + 1 == config.N) {
            if (!recorder.record(t + 1, x)) break;
        }
    }
    traj.final_x = std::move(x);
    return traj;
}

Trajectory run_sync_sgd(const RunConfig& config, const Objective& obj,
                        const AssumptionConstants& constants, const RunOptions& opts) {
    check_run_inputs(config, obj, constants);
    const double alpha = resolve_step_size(config, constants);
    const long stride = resolve_record_stride(opts.record_stride, config.N);
    const SeedRegistry registry(config.master_seed, config.d);

    Trajectory traj;
    add_theorem_warnings(config, traj);
    Recorder recorder{obj, traj, {}, {}};
    ModelVector x = config.x0;
    ModelVector scratch;
    bool alive = recorder.record(0, x);
    for (long t = 0; alive && t < config.N; ++t) {
        const ModelVector g = fo_round(config, obj, registry, x, t, recorder.counters);
        if (!apply_update(x, alpha, g, scratch)) {
            traj.diverged = true;
            traj.error = "non-finite iterate after update at iteration " + std::to_string(t);
            break;
        }
        traj.iterations_run = t + 1;
        if ((t + 1) % stride == 0 || t + 1 == config.N) {
            if (!recorder.record(t + 1, x)) break;
        }
    }
    traj.final_x = std::move(x);
    return traj;
}

Trajectory run_zo_sgd(const RunConfig& config, const Objective& obj,
                      const AssumptionConstants& constants, const RunOptions& opts) {
    check_run_inputs(config, obj, constants);
    const double alpha = resolve_step_size(config, constants);
    const long stride = resolve_record_stride(opts.record_stride, config.N);
    const SeedRegistry registry(config.master_seed, config.d);

    Trajectory traj;
    add_theorem_warnings(config, traj);
    Recorder recorder{obj, traj, {}, {}};
    ModelVector x = config.x0;
    ModelVector scratch;
    bool alive = recorder.record(0, x);
    for (long t = 0; alive && t < config.N; ++t) {
        ModelVector g;
        try {
            g = zo_round(config, obj, registry, x, t, opts.transport, recorder.counters);
        } catch (const NonFiniteError& e) {
            traj.diverged = true;
            traj.error = std::string(e.what()) + " (iteration " + std::to_string(t) + ")";
            break;
        }
        if (!apply_update(x, alpha, g, scratch)) {
            traj.diverged = true;
            traj.error = "non-finite iterate after update at iteration " + std::to_string(t);
            break;
        }
        traj.iterations_run = t + 1;
        if ((t + 1) % stride == 0 || t + 1 == config.N) {
            if (!recorder.record(t + 1, x)) break;
        }
    }
    traj.final_x = std::move(x);
    return traj;
}

Trajectory run_local_avg(const RunConfig& config, const Objective& obj,
                         const AssumptionConstants& constants, const RunOptions& opts) {
    check_run_inputs(config, obj, constants);
    if (config.tau == 1) {
        // Averaging after every single step is synchronous SGD; share that
        // path so the equivalence is exact, not merely approximate.
        return run_sync_sgd(config, obj, constants, opts);
    }
    const double alpha = resolve_step_size(config, constants);
    const long stride = resolve_record_stride(opts.record_stride, config.N);

    Trajectory traj;
    add_theorem_warnings(config, traj);
    Recorder recorder{obj, traj, {}, {}};
    std::vector<ModelVector> locals(static_cast<std::size_t>(config.m), config.x0);
    ModelVector scratch;
    bool alive = recorder.record(0, config.x0);
    for (long t = 0; alive && t < config.N; ++t) {
        bool ok = true;
        for (int i = 1; i <= config.m && ok; ++i) {
            ModelVector& xi = locals[static_cast<std::size_t>(i - 1)];
            const SampleBatch batch =
                draw_batch(config.master_seed, t, i, config.B, obj.num_samples());
            const ModelVector g = fo_gradient_estimate(obj, xi, batch);
            recorder.counters.gevals += static_cast<std::uint64_t>(config.B);
            ok = apply_update(xi, alpha, g, scratch);
        }
        if (!ok) {
            traj.diverged = true;
            traj.error = "non-finite local iterate at iteration " + std::to_string(t);
            break;
        }
        if ((t + 1) % config.tau == 0) {
            const ModelVector consensus = mean_ascending(locals);
            for (ModelVector& xi : locals) xi = consensus;
            recorder.counters.scalars +=
                static_cast<std::uint64_t>(config.m) * config.d;
        }
        traj.iterations_run = t + 1;
        if ((t + 1) % stride == 0 || t + 1 == config.N) {
            if (!recorder.record(t + 1, mean_ascending(locals))) break;
        }
    }
    traj.final_x = mean_ascending(locals);
    return traj;
}

Trajectory run(const RunConfig& config, const Objective& obj,
               const AssumptionConstants& constants, const RunOptions& opts) {
    switch (config.algorithm) {
        case Algorithm::hosgd: return run_hosgd(config, obj, constants, opts);
        case Algorithm::sync_sgd: return run_sync_sgd(config, obj, constants, opts);
        case Algorithm::zo_sgd: return run_zo_sgd(config, obj, constants, opts);
        case Algorithm::local_avg: return run_local_avg(config, obj, constants, opts);
    }
    throw std::invalid_argument("run: unknown algorithm");
}

double comm_load_per_iteration(std::size_t d, int tau) {
    if (d < 1 || tau < 1) {
        throw std::invalid_argument("comm_load_per_iteration: d, tau >= 1");
    }
    return (static_cast<double>(tau) - 1.0 + static_cast<double>(d)) /
           static_cast<double>(tau);
}

}  // namespace hosgd
