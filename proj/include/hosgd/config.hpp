#pragma once

#include <cstdint>
#include <string>

#include "hosgd/vec.hpp"

namespace hosgd {

enum class Algorithm { hosgd, sync_sgd, zo_sgd, local_avg };
enum class ObjectiveId { quadratic, sigmoid_regression, two_layer_tanh, attack };

std::string to_string(Algorithm a);
std::string to_string(ObjectiveId id);
Algorithm algorithm_from_string(const std::string& s);
ObjectiveId objective_from_string(const std::string& s);

struct StepSchedule {
    enum class Kind { theorem_default, constant };
    Kind kind = Kind::theorem_default;
    double alpha = 0.0;  // used when kind == constant

    static StepSchedule theorem() { return {Kind::theorem_default, 0.0}; }
    static StepSchedule constant(double alpha) { return {Kind::constant, alpha}; }
};

/// Everything that determines a run. Equal configs give bit-identical
/// trajectories.
struct RunConfig {
    std::size_t d = 0;
    int m = 1;        // workers
    int B = 1;        // batch size
    int tau = 1;      // first-order period
    double mu = 0.0;  // smoothing parameter
    long N = 0;       // total iterations
    StepSchedule step;
    ObjectiveId objective_id = ObjectiveId::quadratic;
    std::uint64_t master_seed = 0;
    Algorithm algorithm = Algorithm::hosgd;
    ModelVector x0;

    /// Throws std::invalid_argument on violated invariants (counts >= 1,
    /// mu > 0, x0 of dimension d).
    void validate() const;
};

/// Problem constants the convergence analysis consumes. M is carried for
/// completeness but no operation uses it.
struct AssumptionConstants {
    double L = 0.0;       // gradient Lipschitz constant, > 0
    double sigma = 0.0;   // gradient-noise standard deviation bound, >= 0
    double f_star = 0.0;  // lower bound on the objective value
    double M = 0.0;       // gradient-norm bound, >= 0 (unused)

    void validate() const;
};

/// sqrt(B*m) / (L * sqrt(N)): the default constant step size.
double step_size_default(int B, int m, double L, long N);

/// Smallest integer strictly greater than 16*(d + B*m - 1)^2 / (B*m):
/// the iteration count above which the default step size is admissible.
std::uint64_t min_iterations(std::size_t d, int B, int m);

/// 1 / sqrt(d*N): the largest admissible smoothing parameter.
double mu_default(std::size_t d, long N);

}  // namespace hosgd
