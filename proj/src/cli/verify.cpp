#include "cli/verify.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "hosgd/analysis.hpp"
#include "hosgd/objectives.hpp"
#include "hosgd/runner.hpp"

namespace hosgd::cli {
namespace {

struct VerifySizes {
    long grad_mc;
    long value_mc;
    long moment_trials;
    int smoothing_points;
    std::vector<double> smoothing_mus;
    int equivalence_seeds;
    int grad_check_points;
};

VerifySizes sizes_for(bool full) {
    if (full) {
        return {100000, 20000, 10000, 50, {0.2, 0.1, 0.05, 0.01}, 3, 100};
    }
    return {20000, 4000, 1500, 10, {0.1, 0.01}, 1, 50};
}

std::string vec_brief(const ModelVector& x) {
    std::ostringstream out;
    out << "(";
    for (std::size_t j = 0; j < x.size() && j < 4; ++j) {
        if (j != 0) out << ", ";
        out << x[j];
    }
    if (x.size() > 4) out << ", ...";
    out << ")";
    return out.str();
}

// Central-difference gradient check against Objective::eval only.
double fd_rel_error(const Objective& obj, const ModelVector& x, std::size_t sample,
                    double h) {
    ModelVector fd(x.size());
    ModelVector xp = x, xm = x;
    for (std::size_t j = 0; j < x.size(); ++j) {
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        fd[j] = (obj.eval(xp, sample) - obj.eval(xm, sample)) / (2.0 * h);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    ModelVector an;
    obj.grad(x, sample, an);
    ModelVector diff = an;
    axpy(-1.0, fd, diff);
    return norm(diff) / std::max(norm(an), 1e-8);
}

using PointFilter = std::function<bool(const ModelVector&, std::size_t)>;

double max_fd_error(const Objective& obj, int n_points, std::uint64_t key, double h,
                    double x_scale, const PointFilter& accept = nullptr) {
    const std::size_t d = obj.dimension();
    double worst = 0.0;
    int checked = 0;
    for (std::uint64_t p = 0; checked < n_points && p < 50u * static_cast<unsigned>(n_points);
         ++p) {
        const KeyStream stream(key, {static_cast<std::uint64_t>(Stream::probe), p, 23});
        ModelVector x(d);
        stream.fill_normals(x.data(), d, 0);
        scale(x_scale, x);
        std::uint64_t c = 0;
        const std::size_t sample = static_cast<std::size_t>(stream.bounded(c, obj.num_samples()));
        if (accept && !accept(x, sample)) continue;
        worst = std::max(worst, fd_rel_error(obj, x, sample, h));
        ++checked;
    }
    return worst;
}

AttackLossObjective verify_attack_objective() {
    const std::size_t classes = 3, d_img = 6, per_class = 2;
    ClassifierModel model;
    model.num_classes = classes;
    model.input_dim = d_img;
    model.weights.resize(classes * d_img);
    model.biases.resize(classes);
    const KeyStream wstream(0xA77ACull, {1});
    wstream.fill_normals(model.weights.data(), model.weights.size(), 0);
    const KeyStream bstream(0xA77ACull, {2});
    bstream.fill_normals(model.biases.data(), model.biases.size(), 0);

    Dataset images;
    images.cols = d_img;
    images.features.resize(classes * per_class * d_img);
    images.targets.assign(classes * per_class, 0.0);
    const KeyStream istream(0xA77ACull, {3});
    istream.fill_normals(images.features.data(), images.features.size(), 0);
    for (double& v : images.features) v = 0.35 * std::tanh(v);

    std::vector<std::size_t> labels(classes * per_class);
    for (std::size_t k = 0; k < labels.size(); ++k) labels[k] = k % classes;
    return AttackLossObjective(std::move(model), std::move(images), std::move(labels), 1.5);
}

RunConfig small_config(std::size_t d, int m, int B, int tau, long N, double mu,
                       double alpha, std::uint64_t seed, Algorithm alg) {
    RunConfig cfg;
    cfg.d = d;
    cfg.m = m;
    cfg.B = B;
    cfg.tau = tau;
    cfg.mu = mu;
    cfg.N = N;
    cfg.step = StepSchedule::constant(alpha);
    cfg.master_seed = seed;
    cfg.algorithm = alg;
    cfg.x0 = ModelVector(d, 0.25);
    return cfg;
}

VerifyResult check_sphere_unit_norm() {
    VerifyResult r{"sphere_unit_norm", true, ""};
    for (std::size_t d : {1u, 3u, 31u, 200u}) {
        SeedRegistry reg(0xBEEF, d);
        for (long t : {0L, 1L, 7L, 100L}) {
            for (int i : {1, 2, 5}) {
                const double n = norm(reg.direction(t, i));
                if (std::abs(n - 1.0) > 1e-12) {
                    r.pass = false;
                    r.witness = "d=" + std::to_string(d) + " t=" + std::to_string(t) +
                                " worker=" + std::to_string(i) +
                                " norm=" + std::to_string(n);
                    return r;
                }
            }
        }
    }
    return r;
}

VerifyResult check_sphere_determinism() {
    VerifyResult r{"sphere_determinism", true, ""};
    SeedRegistry reg(0xF00D, 17);
    for (long t : {0L, 3L, 19L}) {
        if (reg.direction(t, 2) != reg.direction(t, 2)) {
            r.pass = false;
            r.witness = "repeat draw differs at t=" + std::to_string(t);
            return r;
        }
    }
    if (reg.direction(1, 1) == reg.direction(1, 2)) {
        r.pass = false;
        r.witness = "distinct workers received identical directions";
    }
    return r;
}

VerifyResult check_message_reconstruction() {
    VerifyResult r{"zo_message_reconstruction", true, ""};
    auto obj = make_quadratic(9, 4.0);
    SeedRegistry reg(77, 9);
    const long t = 5;
    const ModelVector x(9, 0.6);
    const ModelVector v = reg.direction(t + 1, 1);
    SampleBatch batch{{0, 0, 0}};
    const ZoEstimate est = zo_gradient_estimate(*obj, x, batch, v, 0.05);
    GradientMessage msg;
    msg.kind = GradientMessage::Kind::zeroth_order;
    msg.sender = 1;
    msg.iteration = t;
    msg.payload_scalar = est.coefficient;
    const ModelVector reconstructed = aggregate({msg}, reg);
    if (reconstructed != est.vector) {
        r.pass = false;
        r.witness = "scalar + seed reconstruction differs from the transmitted vector";
    }
    return r;
}

VerifyResult check_gradients(const VerifySizes& sizes) {
    VerifyResult r{"gradient_finite_difference", true, ""};
    auto record = [&r](const char* name, double err, double tol) {
        if (err > tol && r.pass) {
            r.pass = false;
            r.witness = std::string(name) + ": rel err " + std::to_string(err) +
                        " > " + std::to_string(tol);
        }
    };
    auto q = make_quadratic(3, 10.0);
    record("quadratic", max_fd_error(*q, sizes.grad_check_points, 101, 1e-6, 1.0), 1e-5);
    auto sig = make_sigmoid_regression(8, 60, 0.05, 11);
    record("sigmoid_regression", max_fd_error(*sig, sizes.grad_check_points, 102, 1e-6, 1.0),
           1e-5);
    auto net = make_two_layer_tanh(4, 3, 20, 12);
    record("two_layer_tanh", max_fd_error(*net, sizes.grad_check_points, 103, 1e-6, 0.5),
           1e-4);
    auto attack = verify_attack_objective();
    auto away_from_kinks = [&attack](const ModelVector& x, std::size_t k) {
        return std::abs(attack.hinge_margin(x, k)) > 1e-3 && attack.argmax_gap(x, k) > 1e-3;
    };
    record("attack_loss",
           max_fd_error(attack, sizes.grad_check_points, 104, 1e-6, 0.4, away_from_kinks),
           1e-4);
    return r;
}

VerifyResult check_smoothing(const VerifySizes& sizes) {
    VerifyResult r{"smoothing_inequalities", true, ""};
    auto q = make_quadratic(2, 1.0);
    AssumptionConstants c{1.0, 0.0, 0.0, 0.0};
    SmoothingCheckOptions opts;
    opts.value_samples = sizes.value_mc;
    opts.grad_samples = sizes.grad_mc;
    for (double mu : sizes.smoothing_mus) {
        const CheckReport report =
            check_smoothing_inequalities(*q, mu, c, sizes.smoothing_points, 301, opts);
        if (!report.pass) {
            r.pass = false;
            r.witness = "mu=" + std::to_string(mu) + ": " + report.failures.front();
            return r;
        }
    }
    return r;
}

VerifyResult check_estimator_expectation(const VerifySizes& sizes) {
    VerifyResult r{"zo_estimator_expectation", true, ""};
    auto q = make_quadratic(5, 3.0);
    ModelVector x{0.8, -0.2, 0.5, 0.1, -0.9};
    const SmoothingEstimate est = smoothed_grad_mc(*q, x, 0.01, sizes.grad_mc, 401);
    // Smoothing a quadratic leaves its gradient untouched: grad f_mu = D x.
    ModelVector expected = q->full_grad(x);
    ModelVector diff = est.grad_mean;
    axpy(-1.0, expected, diff);
    if (norm(diff) > 3.0 * est.std_error) {
        r.pass = false;
        r.witness = "||mc - exact|| = " + std::to_string(norm(diff)) + " > 3 se = " +
                    std::to_string(3.0 * est.std_error) + " at x=" + vec_brief(x);
    }
    return r;
}

VerifyResult check_grad_norm_lower_bound(const VerifySizes& sizes) {
    VerifyResult r{"smoothed_grad_norm_lower_bound", true, ""};
    auto q = make_quadratic(3, 2.0);
    const double mu = 0.05, L = 2.0, d = 3.0;
    const ModelVector x{0.9, -0.4, 0.7};
    const SmoothingEstimate est = smoothed_grad_mc(*q, x, mu, sizes.grad_mc, 402);
    const double gsq = norm_sq(q->full_grad(x));
    const double est_norm = norm(est.grad_mean);
    const double slack = (2.0 * est_norm + 3.0 * est.std_error) * 3.0 * est.std_error;
    const double lower = 0.5 * gsq - mu * mu * d * d * L * L / 4.0 - slack;
    if (est_norm * est_norm < lower) {
        r.pass = false;
        r.witness = "||grad f_mu||^2 = " + std::to_string(est_norm * est_norm) +
                    " below " + std::to_string(lower);
    }
    return r;
}

VerifyResult check_second_moment(const VerifySizes& sizes) {
    VerifyResult r{"second_moment_bounds", true, ""};
    auto sig = make_sigmoid_regression(8, 60, 0.05, 21);
    for (int p = 0; p < 3; ++p) {
        ModelVector x(8);
        const KeyStream stream(500 + p, {static_cast<std::uint64_t>(Stream::probe)});
        stream.fill_normals(x.data(), 8, 0);
        scale(0.5, x);
        AssumptionConstants c{sig->lipschitz_estimate(),
                              std::sqrt(empirical_sigma_sq(*sig, x)), 0.0, 0.0};
        const CheckReport report = check_second_moment_bound(
            *sig, x, 0.02, 4, 2, c, sizes.moment_trials, 600 + p);
        if (!report.pass) {
            r.pass = false;
            r.witness = "iterate " + std::to_string(p) + ": " + report.failures.front();
            return r;
        }
    }
    return r;
}

VerifyResult check_scalar_exchange(const VerifySizes&) {
    VerifyResult r{"scalar_exchange_equivalence", true, ""};
    auto sig = make_sigmoid_regression(10, 50, 0.05, 31);
    AssumptionConstants c{sig->lipschitz_estimate(), 0.1, 0.0, 0.0};
    const RunConfig cfg = small_config(10, 3, 2, 4, 60, 1e-3, 0.05, 7, Algorithm::hosgd);
    RunOptions shadow;
    shadow.transport = ZoTransport::vector_shadow;
    const std::string a = to_csv(run_hosgd(cfg, *sig, c));
    const std::string b = to_csv(run_hosgd(cfg, *sig, c, shadow));
    if (a != b) {
        r.pass = false;
        r.witness = "scalar-message and vector-message trajectories differ";
    }
    return r;
}

VerifyResult check_tau1_equivalence(const VerifySizes& sizes) {
    VerifyResult r{"tau1_reduces_to_sync_sgd", true, ""};
    auto sig = make_sigmoid_regression(8, 40, 0.05, 41);
    AssumptionConstants c{sig->lipschitz_estimate(), 0.1, 0.0, 0.0};
    for (int s = 1; s <= sizes.equivalence_seeds; ++s) {
        const RunConfig cfg =
            small_config(8, 4, 2, 1, 50, 1e-3, 0.05, static_cast<std::uint64_t>(s),
                         Algorithm::hosgd);
        if (to_csv(run_hosgd(cfg, *sig, c)) != to_csv(run_sync_sgd(cfg, *sig, c))) {
            r.pass = false;
            r.witness = "seed " + std::to_string(s) + " trajectories differ";
            return r;
        }
    }
    return r;
}

VerifyResult check_comm_accounting(const VerifySizes&) {
    VerifyResult r{"communication_accounting", true, ""};
    auto q = make_quadratic(6, 1.0);
    AssumptionConstants c{1.0, 0.0, 0.0, 0.0};
    for (long N : {16L, 21L}) {
        for (int tau : {2, 4, 8}) {
            const RunConfig cfg = small_config(6, 2, 1, tau, N, 0.01, 0.01, 3,
                                               Algorithm::hosgd);
            const Trajectory traj = run_hosgd(cfg, *q, c);
            const std::uint64_t per_worker = traj.records.back().scalars_sent_cum / 2;
            const std::uint64_t fo_iters =
                static_cast<std::uint64_t>((N + tau - 1) / tau);
            const std::uint64_t expected =
                6 * fo_iters + (static_cast<std::uint64_t>(N) - fo_iters);
            if (per_worker != expected) {
                r.pass = false;
                r.witness = "N=" + std::to_string(N) + " tau=" + std::to_string(tau) +
                            ": measured " + std::to_string(per_worker) + ", expected " +
                            std::to_string(expected);
                return r;
            }
            if (N % tau == 0) {
                // tau | N: the per-iteration average matches the closed form.
                const double avg =
                    static_cast<double>(per_worker) / static_cast<double>(N);
                if (avg != comm_load_per_iteration(6, tau)) {
                    r.pass = false;
                    r.witness = "average load mismatch at tau=" + std::to_string(tau);
                    return r;
                }
            }
        }
    }
    return r;
}

VerifyResult check_eval_accounting(const VerifySizes&) {
    VerifyResult r{"evaluation_accounting", true, ""};
    auto sig = make_sigmoid_regression(6, 30, 0.05, 51);
    AssumptionConstants c{sig->lipschitz_estimate(), 0.1, 0.0, 0.0};
    const int m = 3, B = 4, tau = 4;
    const RunConfig cfg = small_config(6, m, B, tau, 13, 1e-3, 0.05, 5, Algorithm::hosgd);
    const Trajectory traj = run_hosgd(cfg, *sig, c);
    for (std::size_t i = 1; i < traj.records.size(); ++i) {
        const auto& prev = traj.records[i - 1];
        const auto& cur = traj.records[i];
        const bool fo = (prev.t % tau == 0);
        const std::uint64_t want_f = fo ? 0 : 2ull * B * m;
        const std::uint64_t want_g = fo ? static_cast<std::uint64_t>(B) * m : 0;
        if (cur.fevals_cum - prev.fevals_cum != want_f ||
            cur.gevals_cum - prev.gevals_cum != want_g) {
            r.pass = false;
            r.witness = "iteration " + std::to_string(prev.t) + ": fevals +" +
                        std::to_string(cur.fevals_cum - prev.fevals_cum) + ", gevals +" +
                        std::to_string(cur.gevals_cum - prev.gevals_cum);
            return r;
        }
    }
    return r;
}

VerifyResult check_run_determinism(const VerifySizes&) {
    VerifyResult r{"run_determinism", true, ""};
    auto sig = make_sigmoid_regression(7, 40, 0.05, 61);
    AssumptionConstants c{sig->lipschitz_estimate(), 0.1, 0.0, 0.0};
    const RunConfig cfg = small_config(7, 2, 2, 3, 40, 1e-3, 0.05, 13, Algorithm::hosgd);
    if (to_csv(run_hosgd(cfg, *sig, c)) != to_csv(run_hosgd(cfg, *sig, c))) {
        r.pass = false;
        r.witness = "two identical configs produced different trajectories";
    }
    return r;
}

}  // namespace

std::vector<VerifyResult> run_verification(bool full) {
    const VerifySizes sizes = sizes_for(full);
    std::vector<VerifyResult> results;
    const std::vector<std::pair<const char*, std::function<VerifyResult()>>> checks = {
        {"sphere_unit_norm", [] { return check_sphere_unit_norm(); }},
        {"sphere_determinism", [] { return check_sphere_determinism(); }},
        {"zo_message_reconstruction", [] { return check_message_reconstruction(); }},
        {"gradient_finite_difference", [&] { return check_gradients(sizes); }},
        {"smoothing_inequalities", [&] { return check_smoothing(sizes); }},
        {"zo_estimator_expectation", [&] { return check_estimator_expectation(sizes); }},
        {"smoothed_grad_norm_lower_bound",
         [&] { return check_grad_norm_lower_bound(sizes); }},
        {"second_moment_bounds", [&] { return check_second_moment(sizes); }},
        {"scalar_exchange_equivalence", [&] { return check_scalar_exchange(sizes); }},
        {"tau1_reduces_to_sync_sgd", [&] { return check_tau1_equivalence(sizes); }},
        {"communication_accounting", [&] { return check_comm_accounting(sizes); }},
        {"evaluation_accounting", [&] { return check_eval_accounting(sizes); }},
        {"run_determinism", [&] { return check_run_determinism(sizes); }},
    };
    for (const auto& [name, fn] : checks) {
        try {
            results.push_back(fn());
        } catch (const std::exception& e) {
            results.push_back(VerifyResult{name, false, std::string("exception: ") + e.what()});
        }
    }
    return results;
}

int cmd_verify(bool full) {
    const std::vector<VerifyResult> results = run_verification(full);
    bool all_pass = true;
    for (const VerifyResult& r : results) {
        std::printf("[%s] %-32s %s\n", r.pass ? "PASS" : "FAIL", r.property.c_str(),
                    r.witness.c_str());
        all_pass = all_pass && r.pass;
    }
    std::printf("%s (%zu properties, level %s)\n", all_pass ? "OK" : "FAILED",
                results.size(), full ? "full" : "fast");
    return all_pass ? 0 : 1;
}

}  // namespace hosgd::cli
