#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hosgd/config.hpp"
#include "hosgd/objective.hpp"

namespace hosgd {

/// Monte-Carlo estimate of a ball-smoothed quantity. std_error is the
/// sample standard deviation of the draws divided by sqrt(n_samples); for
/// vector-valued estimates the variance is totalled over coordinates, so a
/// single coordinate's standard error is never larger than std_error.
struct SmoothingEstimate {
    double value_mean = 0.0;
    ModelVector grad_mean;
    long n_samples = 0;
    double std_error = 0.0;
};

/// Uniform draw from the d-dimensional unit ball: a sphere draw scaled by
/// U^(1/d). Pure function of (key, draw_index, d).
ModelVector sample_unit_ball(std::uint64_t key, std::uint64_t draw_index, std::size_t d);

/// f_mu(x) = E[f(x + mu u)], u uniform on the unit ball. Requires
/// n_samples >= 1000.
SmoothingEstimate smoothed_value_mc(const Objective& obj, const ModelVector& x, double mu,
                                    long n_samples, std::uint64_t key);

/// grad f_mu(x) via the two-point sphere estimator
/// (d/mu)[f(x + mu v) - f(x)] v averaged over fresh uniform directions.
/// Requires n_samples >= 10000.
SmoothingEstimate smoothed_grad_mc(const Objective& obj, const ModelVector& x, double mu,
                                   long n_samples, std::uint64_t key);

/// Outcome of a property check; serializes to JSON for regression
/// snapshots. A failed point is retried once with 4x the samples before it
/// is reported, which caps the Monte-Carlo flake rate.
struct CheckReport {
    std::string name;
    bool pass = true;
    std::vector<std::string> failures;
    nlohmann::json details;
};

nlohmann::json to_json(const CheckReport& report);

struct SmoothingCheckOptions {
    long value_samples = 4000;
    long grad_samples = 10000;
    double point_scale = 1.0;  // points are N(0, point_scale^2 I)
};

/// At n_points random x, verifies |f_mu - f| <= mu^2 L / 2 and
/// ||grad f_mu - grad f|| <= mu L d / 2, giving the Monte-Carlo side
/// 3 standard errors of slack. Deterministic objectives only (exact f and
/// grad f come from the objective itself).
CheckReport check_smoothing_inequalities(const Objective& obj, double mu,
                                         const AssumptionConstants& constants,
                                         int n_points, std::uint64_t key,
                                         const SmoothingCheckOptions& opts = {});

/// Monte-Carlo check of the update-direction second-moment bounds at a
/// fixed iterate x:
///   first-order  E||G||^2 <= ||grad f(x)||^2 + sigma^2/(Bm)
///   zeroth-order E||G||^2 <= 2(d+Bm-1)/(Bm) ||grad f(x)||^2
///                           + 2 d sigma^2/(Bm) + mu^2 L^2 d^2 / 2
/// over n_trials independent aggregates per case, with 3-standard-error
/// slack. sigma and L are taken from `constants`.
CheckReport check_second_moment_bound(const Objective& obj, const ModelVector& x,
                                      double mu, int B, int m,
                                      const AssumptionConstants& constants,
                                      long n_trials, std::uint64_t key);

/// The convergence guarantee for the average squared gradient norm,
/// evaluated term by term.
struct BoundReport {
    double rhs_total = 0.0;
    std::vector<std::pair<std::string, double>> term_breakdown;
    bool step_size_ok = false;
    bool mu_ok = false;
    bool iterations_ok = false;
};

nlohmann::json to_json(const BoundReport& report);

/// Evaluates every additive term of the final bound (two leading terms,
/// plus eight more gated on tau > 1) and checks the hypotheses on the step
/// size, the smoothing parameter, and the iteration count. f0 = f(x^0).
/// Throws std::invalid_argument on non-positive L or N, or f0 < f_star.
BoundReport theoretical_bound(const RunConfig& config, const AssumptionConstants& constants,
                              double f0);

}  // namespace hosgd
