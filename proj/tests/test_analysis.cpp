#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hosgd/analysis.hpp"
#include "hosgd/objectives.hpp"
#include "support/fixture_objectives.hpp"

using namespace hosgd;
namespace ts = hosgd::testsupport;

namespace {

RunConfig bound_config(std::size_t d, int B, int m, int tau, long N, double mu,
                       StepSchedule step) {
    RunConfig cfg;
    cfg.d = d;
    cfg.B = B;
    cfg.m = m;
    cfg.tau = tau;
    cfg.N = N;
    cfg.mu = mu;
    cfg.step = step;
    cfg.x0 = ModelVector(d, 0.0);
    return cfg;
}

}  // namespace

TEST_CASE("unit ball draws stay inside the ball and are deterministic") {
    for (std::size_t d : {1u, 2u, 5u, 20u}) {
        for (std::uint64_t i = 0; i < 500; ++i) {
            const ModelVector u = sample_unit_ball(7, i, d);
            REQUIRE(u.size() == d);
            CHECK(norm(u) <= 1.0 + 1e-15);
        }
    }
    CHECK(sample_unit_ball(7, 3, 4) == sample_unit_ball(7, 3, 4));
    CHECK(sample_unit_ball(7, 3, 4) != sample_unit_ball(7, 4, 4));
    CHECK(sample_unit_ball(7, 3, 4) != sample_unit_ball(8, 3, 4));
}

TEST_CASE("unit ball: d=1 is uniform on [-1,1]") {
    const int n = 100000;
    double mean = 0.0;
    double mean_abs = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = sample_unit_ball(11, static_cast<std::uint64_t>(i), 1)[0];
        mean += u;
        mean_abs += std::abs(u);
    }
    mean /= n;
    mean_abs /= n;
    CHECK(std::abs(mean) < 0.01);       // 3 * (1/sqrt(3)) / sqrt(n) ~ 0.0055
    CHECK(std::abs(mean_abs - 0.5) < 0.01);
}

TEST_CASE("unit ball: E||u||^2 = d/(d+2)") {
    const int n = 100000;
    for (std::size_t d : {2u, 5u}) {
        double mean = 0.0;
        for (int i = 0; i < n; ++i) {
            mean += norm_sq(sample_unit_ball(13, static_cast<std::uint64_t>(i), d));
        }
        mean /= n;
        CHECK(std::abs(mean - static_cast<double>(d) / (d + 2.0)) < 0.01);
    }
}

TEST_CASE("smoothed_value_mc: constant objective is exact") {
    ts::ConstantObjective c(3, 2.75);
    const SmoothingEstimate est = smoothed_value_mc(c, {0.0, 0.0, 0.0}, 0.5, 1000, 3);
    CHECK(est.value_mean == 2.75);
    CHECK(est.std_error == 0.0);
    CHECK(est.n_samples == 1000);
    CHECK_THROWS_AS(smoothed_value_mc(c, {0.0, 0.0, 0.0}, 0.5, 999, 3),
                    std::invalid_argument);
}

TEST_CASE("smoothed_value_mc: quadratic has closed-form smoothing gap mu^2 d/(2(d+2))") {
    auto q = make_quadratic(2, 1.0);
    const ModelVector x{0.8, -0.6};
    const double mu = 0.1;
    const SmoothingEstimate est = smoothed_value_mc(*q, x, mu, 40000, 5);
    const double expected_gap = mu * mu * 2.0 / (2.0 * 4.0);  // 0.0025
    const double measured_gap = est.value_mean - q->full_eval(x);
    CHECK(std::abs(measured_gap - expected_gap) <= 3.0 * est.std_error);
    CHECK(est.std_error < expected_gap / 3.0);  // the check actually resolves the gap
}

TEST_CASE("smoothed_value_mc: linear objective is unbiased (odd term vanishes)") {
    ts::LinearObjective lin({1.0, -2.0, 0.5});
    const ModelVector x{0.3, 0.2, -0.1};
    const SmoothingEstimate est = smoothed_value_mc(lin, x, 0.3, 20000, 7);
    CHECK(std::abs(est.value_mean - dot(lin.slope(), x)) <= 3.0 * est.std_error);
}

TEST_CASE("smoothed_grad_mc: linear objective recovers the exact slope") {
    ts::LinearObjective lin({0.5, -1.5, 2.0, 0.0});
    const ModelVector x{0.1, 0.2, 0.3, 0.4};
    const SmoothingEstimate est = smoothed_grad_mc(lin, x, 0.05, 20000, 9);
    REQUIRE(est.grad_mean.size() == 4);
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(std::abs(est.grad_mean[j] - lin.slope()[j]) <= 3.0 * est.std_error);
    }
    CHECK_THROWS_AS(smoothed_grad_mc(lin, x, 0.05, 9999, 9), std::invalid_argument);
}

TEST_CASE("smoothed_grad_mc: constant objective gives the exact zero vector") {
    ts::ConstantObjective c(3, 1.0);
    const SmoothingEstimate est = smoothed_grad_mc(c, {0.2, 0.2, 0.2}, 0.1, 10000, 11);
    CHECK(norm(est.grad_mean) == 0.0);
    CHECK(est.std_error == 0.0);
}

TEST_CASE("smoothed_grad_mc: smoothing a quadratic leaves its gradient unchanged") {
    auto q = make_quadratic(2, 1.0);
    const ModelVector x{1.0, -0.5};
    const SmoothingEstimate est = smoothed_grad_mc(*q, x, 0.1, 60000, 13);
    ModelVector diff = est.grad_mean;
    axpy(-1.0, x, diff);  // grad f_mu(x) = x for the identity quadratic
    CHECK(norm(diff) <= 3.0 * est.std_error);
}

TEST_CASE("check_smoothing_inequalities passes on the quadratic across mu") {
    auto q = make_quadratic(2, 1.0);
    AssumptionConstants c{1.0, 0.0, 0.0, 0.0};
    for (double mu : {0.2, 0.1, 0.05, 0.01}) {
        const CheckReport report = check_smoothing_inequalities(*q, mu, c, 10, 17);
        CAPTURE(mu);
        CHECK(report.pass);
        CHECK(report.failures.empty());
        CHECK(report.details["points"].size() == 10);
    }
}

TEST_CASE("check_smoothing_inequalities reports a violation when L is understated") {
    auto q = make_quadratic(4, 8.0);
    // Claim L = 0.01 for a spread-8 quadratic: the bounds must break.
    AssumptionConstants wrong{0.01, 0.0, 0.0, 0.0};
    const CheckReport report = check_smoothing_inequalities(*q, 0.2, wrong, 5, 19);
    CHECK_FALSE(report.pass);
    CHECK_FALSE(report.failures.empty());
    CHECK(report.failures.front().find("point") != std::string::npos);
    const nlohmann::json j = to_json(report);
    CHECK(j["pass"] == false);
}

TEST_CASE("smoothing gaps shrink with mu on the sigmoid objective") {
    auto sig = make_sigmoid_regression(5, 80, 0.0, 23);
    ModelVector x(5, 0.4);
    const double f = sig->full_eval(x);
    const ModelVector g = sig->full_grad(x);

    double value_gap[3], grad_gap[3], value_se[3], grad_se[3];
    const double mus[3] = {0.2, 0.1, 0.05};
    for (int i = 0; i < 3; ++i) {
        const SmoothingEstimate fv = smoothed_value_mc(*sig, x, mus[i], 200000, 29);
        const SmoothingEstimate fg = smoothed_grad_mc(*sig, x, mus[i], 60000, 31);
        value_gap[i] = std::abs(fv.value_mean - f);
        value_se[i] = fv.std_error;
        ModelVector diff = fg.grad_mean;
        axpy(-1.0, g, diff);
        grad_gap[i] = norm(diff);
        grad_se[i] = fg.std_error;
    }
    // Quadratic shrink for the value gap: halving mu divides the gap by ~4.
    CHECK(value_gap[1] <= value_gap[0] / 4.0 + 3.0 * (value_se[0] + value_se[1]));
    CHECK(value_gap[2] <= value_gap[1] / 4.0 + 3.0 * (value_se[1] + value_se[2]));
    // At least linear shrink for the gradient gap.
    CHECK(grad_gap[1] <= grad_gap[0] / 2.0 + 3.0 * (grad_se[0] + grad_se[1]));
    CHECK(grad_gap[2] <= grad_gap[1] / 2.0 + 3.0 * (grad_se[1] + grad_se[2]));
}

TEST_CASE("gradient-norm lower bound (smoothed vs original)") {
    // ||grad f_mu(x)||^2 >= 0.5 ||grad f(x)||^2 - mu^2 d^2 L^2 / 4
    auto q = make_quadratic(3, 2.0);
    const double mu = 0.05, L = 2.0;
    const double d = 3.0;
    ModelVector x{0.9, -0.4, 0.7};
    const SmoothingEstimate est = smoothed_grad_mc(*q, x, mu, 60000, 37);
    const double gsq = norm_sq(q->full_grad(x));
    const double est_norm = norm(est.grad_mean);
    const double slack = (2.0 * est_norm + 3.0 * est.std_error) * 3.0 * est.std_error;
    CHECK(est_norm * est_norm >= 0.5 * gsq - mu * mu * d * d * L * L / 4.0 - slack);
}

TEST_CASE("check_second_moment_bound: deterministic quadratic is tight in the FO case") {
    auto q = make_quadratic(3, 2.0);
    AssumptionConstants c{2.0, 0.0, 0.0, 0.0};
    ModelVector x{1.0, 0.5, -0.5};
    const CheckReport report = check_second_moment_bound(*q, x, 0.05, 2, 3, c, 200, 41);
    CHECK(report.pass);
    // sigma = 0 and one sample: every FO aggregate equals grad f exactly.
    CHECK(report.details["fo_mean"].get<double>() ==
          doctest::Approx(report.details["grad_norm_sq"].get<double>()).epsilon(1e-12));
    CHECK(report.details["fo_std_error"].get<double>() == 0.0);
}

TEST_CASE("check_second_moment_bound: linear objective, ZO case closed form") {
    // E||G||^2 = E[d^2 (a.v)^2] = d ||a||^2 for m = B = 1, sigma = 0.
    ts::LinearObjective lin({0.6, -0.8, 0.2, 0.4});
    AssumptionConstants c{1.0, 0.0, 0.0, 0.0};
    ModelVector x(4, 0.0);
    const CheckReport report = check_second_moment_bound(lin, x, 0.01, 1, 1, c, 4000, 43);
    CHECK(report.pass);
    const double d_a2 = 4.0 * norm_sq(lin.slope());
    const double zo_mean = report.details["zo_mean"].get<double>();
    const double zo_se = report.details["zo_std_error"].get<double>();
    CHECK(std::abs(zo_mean - d_a2) <= 3.0 * zo_se);
}

TEST_CASE("check_second_moment_bound on the sigmoid objective with batching") {
    auto sig = make_sigmoid_regression(8, 60, 0.05, 47);
    ModelVector x(8, 0.2);
    AssumptionConstants c{sig->lipschitz_estimate(),
                          std::sqrt(empirical_sigma_sq(*sig, x)), 0.0, 0.0};
    const CheckReport report = check_second_moment_bound(*sig, x, 0.02, 4, 2, c, 2000, 53);
    CHECK(report.pass);
    CHECK(report.failures.empty());
}

TEST_CASE("theoretical_bound: tau = 1 keeps only the two leading terms") {
    AssumptionConstants c{1.0, 0.0, 0.0, 0.0};
    auto cfg = bound_config(10, 1, 1, 1, 100, 1e-3, StepSchedule::theorem());
    const BoundReport report = theoretical_bound(cfg, c, 1.0);
    REQUIRE(report.term_breakdown.size() == 2);
    CHECK(report.rhs_total == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(report.term_breakdown[0].second == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(report.term_breakdown[1].second == 0.0);

    AssumptionConstants noisy{1.0, 1.0, 0.0, 0.0};
    const BoundReport with_noise = theoretical_bound(cfg, noisy, 1.0);
    CHECK(with_noise.rhs_total == doctest::Approx(0.6).epsilon(1e-15));
    // tau = 1: rhs = 4L(f0-f*)/sqrt(BmN) + 2 sigma^2 / sqrt(BmN), exactly.
    CHECK(with_noise.rhs_total ==
          4.0 / std::sqrt(100.0) + 2.0 / std::sqrt(100.0));
}

TEST_CASE("theoretical_bound: tau > 1 adds eight nonnegative gated terms") {
    AssumptionConstants c{2.0, 0.5, -1.0, 0.0};
    auto cfg1 = bound_config(20, 2, 3, 1, 4000, 1e-4, StepSchedule::theorem());
    auto cfg8 = bound_config(20, 2, 3, 8, 4000, 1e-4, StepSchedule::theorem());
    const BoundReport r1 = theoretical_bound(cfg1, c, 2.0);
    const BoundReport r8 = theoretical_bound(cfg8, c, 2.0);
    REQUIRE(r8.term_breakdown.size() == 10);
    double sum = 0.0;
    for (const auto& [name, value] : r8.term_breakdown) {
        CAPTURE(name);
        CHECK(value >= 0.0);
        sum += value;
    }
    CHECK(r8.rhs_total == sum);
    CHECK(r8.rhs_total > r1.rhs_total);

    // The duplicated dL^2 pair from the final display really is duplicated.
    CHECK(r8.term_breakdown[4].second == r8.term_breakdown[8].second);
    CHECK(r8.term_breakdown[5].second == r8.term_breakdown[9].second);
}

TEST_CASE("theoretical_bound: preconditions") {
    AssumptionConstants c{1.0, 0.0, 0.0, 0.0};
    // d=10, B=m=1: min iterations 16*100 = 1600 -> 1601.
    auto ok = bound_config(10, 1, 1, 4, 1601, mu_default(10, 1601), StepSchedule::theorem());
    BoundReport report = theoretical_bound(ok, c, 1.0);
    CHECK(report.step_size_ok);
    CHECK(report.mu_ok);
    CHECK(report.iterations_ok);

    auto short_run = bound_config(10, 1, 1, 4, 1600, mu_default(10, 1600), StepSchedule::theorem());
    CHECK_FALSE(theoretical_bound(short_run, c, 1.0).iterations_ok);

    auto big_mu = bound_config(10, 1, 1, 4, 1601, 2.0 * mu_default(10, 1601), StepSchedule::theorem());
    CHECK_FALSE(theoretical_bound(big_mu, c, 1.0).mu_ok);

    auto exact_alpha =
        bound_config(10, 1, 1, 4, 1601, mu_default(10, 1601),
                     StepSchedule::constant(step_size_default(1, 1, 1.0, 1601)));
    CHECK(theoretical_bound(exact_alpha, c, 1.0).step_size_ok);
    auto other_alpha = bound_config(10, 1, 1, 4, 1601, mu_default(10, 1601),
                                    StepSchedule::constant(0.123));
    CHECK_FALSE(theoretical_bound(other_alpha, c, 1.0).step_size_ok);
}

TEST_CASE("theoretical_bound: argument errors and JSON shape") {
    AssumptionConstants c{1.0, 0.0, 0.0, 0.0};
    auto cfg = bound_config(10, 1, 1, 2, 100, 1e-3, StepSchedule::theorem());
    CHECK_THROWS_AS(theoretical_bound(cfg, c, -1.0), std::invalid_argument);  // f0 < f*
    AssumptionConstants bad = c;
    bad.L = 0.0;
    CHECK_THROWS_AS(theoretical_bound(cfg, bad, 1.0), std::invalid_argument);
    auto bad_n = cfg;
    bad_n.N = 0;
    CHECK_THROWS_AS(theoretical_bound(bad_n, c, 1.0), std::invalid_argument);

    const nlohmann::json j = to_json(theoretical_bound(cfg, c, 1.0));
    CHECK(j.contains("rhs_total"));
    CHECK(j["terms"].is_array());
    CHECK(j["preconditions"].contains("step_size"));
    CHECK(j["preconditions"].contains("mu"));
    CHECK(j["preconditions"].contains("iterations"));
}
