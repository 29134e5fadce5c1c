#include "hosgd/config.hpp"

#include <cmath>
#include <stdexcept>

namespace hosgd {

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::hosgd: return "hosgd";
        case Algorithm::sync_sgd: return "sync_sgd";
        case Algorithm::zo_sgd: return "zo_sgd";
        case Algorithm::local_avg: return "local_avg";
    }
    return "?";
}

std::string to_string(ObjectiveId id) {
    switch (id) {
        case ObjectiveId::quadratic: return "quadratic";
        case ObjectiveId::sigmoid_regression: return "sigmoid_regression";
        case ObjectiveId::two_layer_tanh: return "two_layer_tanh";
        case ObjectiveId::attack: return "attack";
    }
    return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
    if (s == "hosgd") return Algorithm::hosgd;
    if (s == "sync_sgd") return Algorithm::sync_sgd;
    if (s == "zo_sgd") return Algorithm::zo_sgd;
    if (s == "local_avg") return Algorithm::local_avg;
    throw std::invalid_argument("unknown algorithm: " + s);
}

ObjectiveId objective_from_string(const std::string& s) {
    if (s == "quadratic") return ObjectiveId::quadratic;
    if (s == "sigmoid_regression" || s == "sigmoid") return ObjectiveId::sigmoid_regression;
    if (s == "two_layer_tanh") return ObjectiveId::two_layer_tanh;
    if (s == "attack") return ObjectiveId::attack;
    throw std::invalid_argument("unknown objective_id: " + s);
}

void RunConfig::validate() const {
    if (d < 1) throw std::invalid_argument("RunConfig: d must be >= 1");
    if (m < 1) throw std::invalid_argument("RunConfig: m must be >= 1");
    if (B < 1) throw std::invalid_argument("RunConfig: B must be >= 1");
    if (tau < 1) throw std::invalid_argument("RunConfig: tau must be >= 1");
    if (N < 1) throw std::invalid_argument("RunConfig: N must be >= 1");
    if (!(mu > 0.0)) throw std::invalid_argument("RunConfig: mu must be > 0");
    if (step.kind == StepSchedule::Kind::constant && !(step.alpha > 0.0)) {
        throw std::invalid_argument("RunConfig: constant step size must be > 0");
    }
    if (x0.size() != d) throw std::invalid_argument("RunConfig: x0 dimension != d");
    if (!all_finite(x0)) throw std::invalid_argument("RunConfig: x0 must be finite");
}

void AssumptionConstants::validate() const {
    if (!(L > 0.0)) throw std::invalid_argument("AssumptionConstants: L must be > 0");
    if (!(sigma >= 0.0)) throw std::invalid_argument("AssumptionConstants: sigma must be >= 0");
    if (!std::isfinite(f_star)) throw std::invalid_argument("AssumptionConstants: f_star must be finite");
    if (!(M >= 0.0)) throw std::invalid_argument("AssumptionConstants: M must be >= 0");
}

double step_size_default(int B, int m, double L, long N) {
    if (B < 1 || m < 1 || !(L > 0.0) || N < 1) {
        throw std::invalid_argument("step_size_default: all inputs must be positive");
    }
    return std::sqrt(static_cast<double>(B) * static_cast<double>(m)) /
           (L * std::sqrt(static_cast<double>(N)));
}

std::uint64_t min_iterations(std::size_t d, int B, int m) {
    if (d < 1 || B < 1 || m < 1) {
        throw std::invalid_argument("min_iterations: all inputs must be positive");
    }
    const std::uint64_t bm = static_cast<std::uint64_t>(B) * static_cast<std::uint64_t>(m);
    const std::uint64_t base = static_cast<std::uint64_t>(d) + bm - 1;
    const std::uint64_t num = 16ull * base * base;
    // Smallest integer strictly greater than num/bm, in exact integer
    // arithmetic: floor(num/bm) + 1 regardless of divisibility.
    return num / bm + 1;
}

double mu_default(std::size_t d, long N) {
    if (d < 1 || N < 1) throw std::invalid_argument("mu_default: inputs must be positive");
    return 1.0 / std::sqrt(static_cast<double>(d) * static_cast<double>(N));
}

}  // namespace hosgd
