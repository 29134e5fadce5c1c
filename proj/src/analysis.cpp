#include "hosgd/analysis.hpp"

#include <cmath>
#include <stdexcept>

#include "hosgd/rng.hpp"
#include "hosgd/runner.hpp"

namespace hosgd {
namespace {

// Key-word roles under Stream::mc / Stream::ball / Stream::probe.
constexpr std::uint64_t kSphereDraw = 1;
constexpr std::uint64_t kRadiusDraw = 2;
constexpr std::uint64_t kCheckPoint = 3;
constexpr std::uint64_t kMomentBatch = 4;
constexpr std::uint64_t kMomentDir = 5;

void sphere_from_stream(const KeyStream& stream, ModelVector& out) {
    const std::size_t d = out.size();
    const std::uint64_t block = static_cast<std::uint64_t>(d + (d & 1));
    for (std::uint64_t attempt = 0;; ++attempt) {
        stream.fill_normals(out.data(), d, attempt * block);
        const double nsq = norm_sq(out);
        if (nsq > 0.0) {
            scale(1.0 / std::sqrt(nsq), out);
            return;
        }
    }
}

// Scalar Welford accumulator.
struct RunningScalar {
    long n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double v) {
        ++n;
        const double delta = v - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (v - mean);
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double std_error() const {
        return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
    }
};

// Vector Welford accumulator; m2 totals the variance over coordinates.
struct RunningVector {
    long n = 0;
    ModelVector mean;
    double m2 = 0.0;
    ModelVector delta_;
    ModelVector post_;

    explicit RunningVector(std::size_t d) : mean(d, 0.0), delta_(d), post_(d) {}

    void add(const ModelVector& v) {
        ++n;
        delta_ = v;
        axpy(-1.0, mean, delta_);  // delta = v - old_mean
        axpy(1.0 / static_cast<double>(n), delta_, mean);
        post_ = v;
        axpy(-1.0, mean, post_);  // v - new_mean
        m2 += dot(delta_, post_);
    }
    double variance_total() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double std_error() const {
        return n > 0 ? std::sqrt(variance_total() / static_cast<double>(n)) : 0.0;
    }
};

}  // namespace

ModelVector sample_unit_ball(std::uint64_t key, std::uint64_t draw_index, std::size_t d) {
    if (d < 1) throw std::invalid_argument("sample_unit_ball: d >= 1");
    ModelVector u(d);
    const KeyStream sphere_stream(key, {static_cast<std::uint64_t>(Stream::ball),
                                        kSphereDraw, draw_index});
    sphere_from_stream(sphere_stream, u);
    const KeyStream radius_stream(key, {static_cast<std::uint64_t>(Stream::ball),
                                        kRadiusDraw, draw_index});
    const double r = std::pow(radius_stream.unit_open(0), 1.0 / static_cast<double>(d));
    scale(r, u);
    return u;
}

SmoothingEstimate smoothed_value_mc(const Objective& obj, const ModelVector& x, double mu,
                                    long n_samples, std::uint64_t key) {
    if (n_samples < 1000) {
        throw std::invalid_argument("smoothed_value_mc: need n_samples >= 1000");
    }
    RunningScalar acc;
    ModelVector shifted;
    for (long i = 0; i < n_samples; ++i) {
        const ModelVector u =
            sample_unit_ball(key, static_cast<std::uint64_t>(i), x.size());
        add_scaled(x, mu, u, shifted);
        acc.add(obj.full_eval(shifted));
    }
    SmoothingEstimate est;
    est.value_mean = acc.mean;
    est.n_samples = n_samples;
    est.std_error = acc.std_error();
    return est;
}

SmoothingEstimate smoothed_grad_mc(const Objective& obj, const ModelVector& x, double mu,
                                   long n_samples, std::uint64_t key) {
    if (n_samples < 10000) {
        throw std::invalid_argument("smoothed_grad_mc: need n_samples >= 10000");
    }
    const std::size_t d = x.size();
    const double f_base = obj.full_eval(x);
    const double d_over_mu = static_cast<double>(d) / mu;
    RunningVector acc(d);
    ModelVector v(d), shifted, draw;
    for (long i = 0; i < n_samples; ++i) {
        const KeyStream dir_stream(key, {static_cast<std::uint64_t>(Stream::mc),
                                         static_cast<std::uint64_t>(i)});
        sphere_from_stream(dir_stream, v);
        add_scaled(x, mu, v, shifted);
        const double coeff = d_over_mu * (obj.full_eval(shifted) - f_base);
        scaled_copy(coeff, v, draw);
        acc.add(draw);
    }
    SmoothingEstimate est;
    est.grad_mean = acc.mean;
    est.n_samples = n_samples;
    est.std_error = acc.std_error();
    return est;
}

nlohmann::json to_json(const CheckReport& report) {
    nlohmann::json j;
    j["name"] = report.name;
    j["pass"] = report.pass;
    j["failures"] = report.failures;
    j["details"] = report.details;
    return j;
}

CheckReport check_smoothing_inequalities(const Objective& obj, double mu,
                                         const AssumptionConstants& constants,
                                         int n_points, std::uint64_t key,
                                         const SmoothingCheckOptions& opts) {
    constants.validate();
    const std::size_t d = obj.dimension();
    const double L = constants.L;
    const double value_bound = 0.5 * mu * mu * L;
    const double grad_bound = 0.5 * mu * L * static_cast<double>(d);

    CheckReport report;
    report.name = "smoothing_inequalities";
    report.details["mu"] = mu;
    report.details["value_bound"] = value_bound;
    report.details["grad_bound"] = grad_bound;
    report.details["points"] = nlohmann::json::array();

    ModelVector x(d), diff;
    for (int p = 0; p < n_points; ++p) {
        const KeyStream point_stream(key, {static_cast<std::uint64_t>(Stream::probe),
                                           kCheckPoint, static_cast<std::uint64_t>(p)});
        point_stream.fill_normals(x.data(), d, 0);
        scale(opts.point_scale, x);

        const double f_exact = obj.full_eval(x);
        const ModelVector g_exact = obj.full_grad(x);
        const std::uint64_t point_key =
            KeyStream(key, {static_cast<std::uint64_t>(p)}).word(0);

        double value_gap = 0.0, value_allow = 0.0;
        double grad_gap = 0.0, grad_allow = 0.0;
        bool ok = false;
        for (int round = 0; round < 2 && !ok; ++round) {
            const long scale_up = round == 0 ? 1 : 4;
            const SmoothingEstimate fv =
                smoothed_value_mc(obj, x, mu, opts.value_samples * scale_up, point_key);
            const SmoothingEstimate fg =
                smoothed_grad_mc(obj, x, mu, opts.grad_samples * scale_up, point_key);
            value_gap = std::abs(fv.value_mean - f_exact);
            value_allow = value_bound + 3.0 * fv.std_error;
            diff = fg.grad_mean;
            axpy(-1.0, g_exact, diff);
            grad_gap = norm(diff);
            grad_allow = grad_bound + 3.0 * fg.std_error;
            ok = value_gap <= value_allow && grad_gap <= grad_allow;
        }
        report.details["points"].push_back({{"point", p},
                                            {"value_gap", value_gap},
                                            {"value_allow", value_allow},
                                            {"grad_gap", grad_gap},
                                            {"grad_allow", grad_allow},
                                            {"pass", ok}});
        if (!ok) {
            report.pass = false;
            report.failures.push_back(
                "point " + std::to_string(p) + ": |f_mu-f| = " + std::to_string(value_gap) +
                " (allowed " + std::to_string(value_allow) + "), ||grad gap|| = " +
                std::to_string(grad_gap) + " (allowed " + std::to_string(grad_allow) + ")");
        }
    }
    return report;
}

CheckReport check_second_moment_bound(const Objective& obj, const ModelVector& x,
                                      double mu, int B, int m,
                                      const AssumptionConstants& constants,
                                      long n_trials, std::uint64_t key) {
    constants.validate();
    if (B < 1 || m < 1 || n_trials < 1) {
        throw std::invalid_argument("check_second_moment_bound: B, m, n_trials >= 1");
    }
    const std::size_t d = obj.dimension();
    const double bm = static_cast<double>(B) * static_cast<double>(m);
    const double gn2 = norm_sq(obj.full_grad(x));
    const double sigma_sq = constants.sigma * constants.sigma;
    const double L = constants.L;

    const double fo_bound = gn2 + sigma_sq / bm;
    const double zo_bound = 2.0 * (static_cast<double>(d) + bm - 1.0) / bm * gn2 +
                            2.0 * static_cast<double>(d) * sigma_sq / bm +
                            0.5 * mu * mu * L * L * static_cast<double>(d) *
                                static_cast<double>(d);

    CheckReport report;
    report.name = "second_moment_bound";
    report.details["fo_bound"] = fo_bound;
    report.details["zo_bound"] = zo_bound;
    report.details["grad_norm_sq"] = gn2;

    const std::size_t K = obj.num_samples();
    ModelVector worker(d), agg(d), tmp;

    auto draw_indices = [&](std::uint64_t role, long trial, int worker_idx) {
        SampleBatch batch;
        batch.indices.resize(static_cast<std::size_t>(B));
        const KeyStream stream(key, {static_cast<std::uint64_t>(Stream::mc), role,
                                     static_cast<std::uint64_t>(trial),
                                     static_cast<std::uint64_t>(worker_idx)});
        std::uint64_t counter = 0;
        for (int b = 0; b < B; ++b) {
            batch.indices[static_cast<std::size_t>(b)] =
                static_cast<std::size_t>(stream.bounded(counter, K));
        }
        return batch;
    };

    for (int round = 0; round < 2; ++round) {
        const long trials = n_trials * (round == 0 ? 1 : 4);
        RunningScalar fo_acc, zo_acc;
        for (long j = 0; j < trials; ++j) {
            // First-order aggregate.
            agg.assign(d, 0.0);
            for (int i = 1; i <= m; ++i) {
                const SampleBatch batch = draw_indices(kMomentBatch, j, i);
                worker = fo_gradient_estimate(obj, x, batch);
                axpy(1.0, worker, agg);
            }
            scale(1.0 / static_cast<double>(m), agg);
            fo_acc.add(norm_sq(agg));

            // Zeroth-order aggregate with fresh directions.
            agg.assign(d, 0.0);
            for (int i = 1; i <= m; ++i) {
                const SampleBatch batch = draw_indices(kMomentBatch, j, i);
                const KeyStream dir_stream(key, {static_cast<std::uint64_t>(Stream::mc),
                                                 kMomentDir, static_cast<std::uint64_t>(j),
                                                 static_cast<std::uint64_t>(i)});
                tmp.resize(d);
                sphere_from_stream(dir_stream, tmp);
                const ZoEstimate est = zo_gradient_estimate(obj, x, batch, tmp, mu);
                axpy(est.coefficient, tmp, agg);
            }
            scale(1.0 / static_cast<double>(m), agg);
            zo_acc.add(norm_sq(agg));
        }
        const bool fo_ok = fo_acc.mean <= fo_bound + 3.0 * fo_acc.std_error();
        const bool zo_ok = zo_acc.mean <= zo_bound + 3.0 * zo_acc.std_error();
        report.details["fo_mean"] = fo_acc.mean;
        report.details["fo_std_error"] = fo_acc.std_error();
        report.details["zo_mean"] = zo_acc.mean;
        report.details["zo_std_error"] = zo_acc.std_error();
        report.details["trials"] = trials;
        if (fo_ok && zo_ok) {
            report.pass = true;
            report.failures.clear();
            return report;
        }
        report.pass = false;
        report.failures.clear();
        if (!fo_ok) {
            report.failures.push_back("first-order moment " + std::to_string(fo_acc.mean) +
                                      " exceeds bound " + std::to_string(fo_bound) +
                                      " + 3se");
        }
        if (!zo_ok) {
            report.failures.push_back("zeroth-order moment " + std::to_string(zo_acc.mean) +
                                      " exceeds bound " + std::to_string(zo_bound) +
                                      " + 3se");
        }
    }
    return report;
}

nlohmann::json to_json(const BoundReport& report) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [name, value] : report.term_breakdown) {
        terms.push_back({{"name", name}, {"value", value}});
    }
    return nlohmann::json{{"rhs_total", report.rhs_total},
                          {"terms", terms},
                          {"preconditions",
                           {{"step_size", report.step_size_ok},
                            {"mu", report.mu_ok},
                            {"iterations", report.iterations_ok}}}};
}

BoundReport theoretical_bound(const RunConfig& config, const AssumptionConstants& constants,
                              double f0) {
    if (!(constants.L > 0.0)) {
        throw std::invalid_argument("theoretical_bound: L must be positive");
    }
    if (config.N < 1) throw std::invalid_argument("theoretical_bound: N must be positive");
    if (config.d < 1 || config.B < 1 || config.m < 1 || config.tau < 1) {
        throw std::invalid_argument("theoretical_bound: d, B, m, tau must be positive");
    }
    if (f0 < constants.f_star) {
        throw std::invalid_argument("theoretical_bound: f0 below f_star");
    }

    const double L = constants.L;
    const double sigma_sq = constants.sigma * constants.sigma;
    const double d = static_cast<double>(config.d);
    const double tau = static_cast<double>(config.tau);
    const double N = static_cast<double>(config.N);
    const double root_bmn =
        std::sqrt(static_cast<double>(config.B) * static_cast<double>(config.m) * N);

    BoundReport report;
    auto term = [&report](const std::string& name, double value) {
        report.term_breakdown.emplace_back(name, value);
        report.rhs_total += value;
    };

    term("fo_descent", 4.0 * L * (f0 - constants.f_star) / root_bmn);
    term("fo_variance", 2.0 * sigma_sq / (root_bmn * tau));
    if (config.tau > 1) {
        const double L2 = L * L;
        term("zo_bias_window", 4.0 * L2 / (d * root_bmn * tau));
        term("zo_bias_residual", 4.0 * L2 / (d * N * root_bmn));
        term("zo_bias_sq_main", d * L2 * (tau - 1.0) / (tau * root_bmn));
        term("zo_bias_sq_residual", d * L2 / (N * root_bmn * tau));
        term("zo_variance_main", 4.0 * d * sigma_sq * (tau - 1.0) / (tau * root_bmn));
        term("zo_variance_residual", 4.0 * d * sigma_sq / (N * root_bmn * tau));
        term("zo_moment_main", d * L2 * (tau - 1.0) / (tau * root_bmn));
        term("zo_moment_residual", d * L2 / (N * root_bmn * tau));
    }

    const double alpha_theorem = step_size_default(config.B, config.m, L, config.N);
    report.step_size_ok =
        config.step.kind == StepSchedule::Kind::theorem_default ||
        std::abs(config.step.alpha - alpha_theorem) <= 1e-12 * alpha_theorem;
    report.mu_ok = config.mu <= mu_default(config.d, config.N);
    report.iterations_ok =
        static_cast<std::uint64_t>(config.N) >= min_iterations(config.d, config.B, config.m);
    return report;
}

}  // namespace hosgd
