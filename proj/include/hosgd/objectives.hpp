#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "hosgd/objective.hpp"

namespace hosgd {

/// Dense K x cols sample matrix, row-major, plus one target per row.
struct Dataset {
    std::size_t cols = 0;
    std::vector<double> features;  // K * cols
    std::vector<double> targets;   // K

    std::size_t rows() const { return cols == 0 ? 0 : features.size() / cols; }
    const double* row(std::size_t k) const { return features.data() + k * cols; }
};

/// f(x) = 1/2 x^T D x with D diagonal, log-spaced in [1, spread].
/// Deterministic: every sample index sees the same function (sigma = 0),
/// L = spread, f* = 0 at x = 0.
class QuadraticObjective final : public Objective {
public:
    QuadraticObjective(std::size_t d, double spread);

    using Objective::grad;

    double eval(const ModelVector& x, std::size_t sample) const override;
    void grad(const ModelVector& x, std::size_t sample, ModelVector& out) const override;
    std::size_t num_samples() const override { return 1; }
    std::size_t dimension() const override { return curvature_.size(); }
    double lipschitz_estimate() const override { return spread_; }
    double f_star_estimate() const override { return 0.0; }

    const ModelVector& curvature() const { return curvature_; }

private:
    ModelVector curvature_;
    double spread_;
};

/// F(x, k) = (sigmoid(a_k . x) - y_k)^2, a standard non-convex stochastic
/// loss on synthetic data.
class SigmoidRegressionObjective final : public Objective {
public:
    explicit SigmoidRegressionObjective(Dataset data);

    using Objective::grad;

    double eval(const ModelVector& x, std::size_t sample) const override;
    void grad(const ModelVector& x, std::size_t sample, ModelVector& out) const override;
    std::size_t num_samples() const override { return data_.rows(); }
    std::size_t dimension() const override { return data_.cols; }
    double lipschitz_estimate() const override { return lipschitz_; }
    double f_star_estimate() const override { return 0.0; }

    const Dataset& data() const { return data_; }

private:
    Dataset data_;
    double lipschitz_;
};

/// Squared-error regression through a tanh hidden layer. Parameter vector
/// layout: [W1 (hidden x d_in, row-major) | b1 (hidden) | w2 (hidden) | b2].
class TwoLayerTanhObjective final : public Objective {
public:
    TwoLayerTanhObjective(std::size_t d_in, std::size_t hidden, Dataset data);

    using Objective::grad;

    double eval(const ModelVector& x, std::size_t sample) const override;
    void grad(const ModelVector& x, std::size_t sample, ModelVector& out) const override;
    std::size_t num_samples() const override { return data_.rows(); }
    std::size_t dimension() const override { return dim_; }
    double lipschitz_estimate() const override { return lipschitz_; }
    double f_star_estimate() const override { return 0.0; }

    std::size_t input_dim() const { return d_in_; }
    std::size_t hidden_units() const { return hidden_; }

private:
    double forward(const ModelVector& x, std::size_t k, std::vector<double>& hidden_out) const;

    std::size_t d_in_;
    std::size_t hidden_;
    std::size_t dim_;
    Dataset data_;
    double lipschitz_;
};

/// Linear per-class scorer: score_j(z) = w_j . z + b_j.
struct ClassifierModel {
    std::size_t num_classes = 0;
    std::size_t input_dim = 0;
    std::vector<double> weights;  // num_classes x input_dim, row-major
    std::vector<double> biases;   // num_classes

    double score(std::size_t cls, const ModelVector& z) const;
    void validate() const;
};

/// Universal-perturbation attack loss against a fixed classifier:
///   z = 0.5 * tanh(atanh(2 a_k) + x)   (elementwise)
///   F(x, k) = c * max{0, s_{y_k}(z) - max_{j != y_k} s_j(z)} + ||z - a_k||^2
/// The tanh reparameterization keeps z inside (-0.5, 0.5)^d for any x.
/// Subgradient 0 is taken for the hinge term at its kink; argmax ties pick
/// the smallest class index.
class AttackLossObjective final : public Objective {
public:
    /// Throws std::invalid_argument if any image coordinate is not strictly
    /// inside (-0.5, 0.5) (atanh singularity) or a label is out of range.
    AttackLossObjective(ClassifierModel model, Dataset images,
                        std::vector<std::size_t> labels, double c);

    using Objective::grad;

    double eval(const ModelVector& x, std::size_t sample) const override;
    void grad(const ModelVector& x, std::size_t sample, ModelVector& out) const override;
    std::size_t num_samples() const override { return labels_.size(); }
    std::size_t dimension() const override { return images_.cols; }
    double lipschitz_estimate() const override { return lipschitz_; }
    double f_star_estimate() const override { return 0.0; }

    /// s_y(z) - max_{j != y} s_j(z) at the perturbed image; the hinge is
    /// active when this is positive.
    double hinge_margin(const ModelVector& x, std::size_t sample) const;
    /// Gap between the best and second-best competing class scores; small
    /// values mean the argmax inside the hinge is about to switch.
    double argmax_gap(const ModelVector& x, std::size_t sample) const;

private:
    void perturbed(const ModelVector& x, std::size_t k, ModelVector& z,
                   ModelVector& dz) const;
    std::size_t best_other(const ModelVector& z, std::size_t label, double* best,
                           double* second) const;

    ClassifierModel model_;
    Dataset images_;
    std::vector<double> atanh2a_;  // atanh(2 a_k), precomputed per image
    std::vector<std::size_t> labels_;
    double c_;
    double lipschitz_;
};

std::unique_ptr<QuadraticObjective> make_quadratic(std::size_t d, double condition_spread);

/// Synthetic (a_k, y_k): a_k ~ N(0, I_d), y_k = sigmoid(a_k . x_true) plus
/// Gaussian noise of the given level, all derived from data_seed.
std::unique_ptr<SigmoidRegressionObjective> make_sigmoid_regression(
    std::size_t d, std::size_t K, double noise_level, std::uint64_t data_seed);

/// The x_true under make_sigmoid_regression's data, re-derivable from the
/// seed (noiseless data has zero loss exactly there).
ModelVector sigmoid_ground_truth(std::size_t d, std::uint64_t data_seed);

/// Teacher-generated regression data for a d_in -> hidden -> 1 tanh net.
/// Total parameter count hidden*(d_in+1) + hidden + 1 must be <= 5000.
std::unique_ptr<TwoLayerTanhObjective> make_two_layer_tanh(
    std::size_t d_in, std::size_t hidden, std::size_t K, std::uint64_t data_seed);

std::unique_ptr<AttackLossObjective> make_attack_loss(ClassifierModel model,
                                                      Dataset images,
                                                      std::vector<std::size_t> labels,
                                                      double c);

}  // namespace hosgd
