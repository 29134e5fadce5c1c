#include "hosgd/objectives.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "hosgd/kernels.hpp"
#include "hosgd/rng.hpp"

namespace hosgd {
namespace {

// Key-word roles inside Stream::data.
constexpr std::uint64_t kFeatures = 1;
constexpr std::uint64_t kGroundTruth = 2;
constexpr std::uint64_t kNoise = 3;

// Fixed key for the numerical Lipschitz probes; any constant works, it only
// has to be reproducible.
constexpr std::uint64_t kLipschitzKey = 0xA11CEull;

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

}  // namespace

// ---------------------------------------------------------------------------
// Quadratic

QuadraticObjective::QuadraticObjective(std::size_t d, double spread) : spread_(spread) {
    if (d < 1) throw std::invalid_argument("QuadraticObjective: d must be >= 1");
    if (!(spread > 0.0)) throw std::invalid_argument("QuadraticObjective: spread must be > 0");
    curvature_.resize(d);
    if (d == 1) {
        curvature_[0] = 1.0;
        spread_ = 1.0;
    } else {
        const double log_spread = std::log(spread);
        for (std::size_t j = 0; j < d; ++j) {
            curvature_[j] = std::exp(log_spread * static_cast<double>(j) /
                                     static_cast<double>(d - 1));
        }
        spread_ = std::max(spread, 1.0);
    }
}

double QuadraticObjective::eval(const ModelVector& x, std::size_t) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) acc += curvature_[j] * x[j] * x[j];
    return 0.5 * acc;
}

void QuadraticObjective::grad(const ModelVector& x, std::size_t, ModelVector& out) const {
    out.resize(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = curvature_[j] * x[j];
}

std::unique_ptr<QuadraticObjective> make_quadratic(std::size_t d, double condition_spread) {
    return std::make_unique<QuadraticObjective>(d, condition_spread);
}

// ---------------------------------------------------------------------------
// Sigmoid regression

SigmoidRegressionObjective::SigmoidRegressionObjective(Dataset data)
    : data_(std::move(data)) {
    if (data_.cols < 1 || data_.rows() < 1 ||
        data_.targets.size() != data_.rows()) {
        throw std::invalid_argument("SigmoidRegressionObjective: malformed dataset");
    }
    lipschitz_ = estimate_grad_lipschitz(*this, 100, kLipschitzKey);
}

double SigmoidRegressionObjective::eval(const ModelVector& x, std::size_t k) const {
    const double t = kernels::active().dot(data_.row(k), x.data(), data_.cols);
    const double diff = sigmoid(t) - data_.targets[k];
    return diff * diff;
}

void SigmoidRegressionObjective::grad(const ModelVector& x, std::size_t k,
                                      ModelVector& out) const {
    const double t = kernels::active().dot(data_.row(k), x.data(), data_.cols);
    const double s = sigmoid(t);
    const double coeff = 2.0 * (s - data_.targets[k]) * s * (1.0 - s);
    out.resize(data_.cols);
    kernels::active().scaled_copy(coeff, data_.row(k), out.data(), data_.cols);
}

ModelVector sigmoid_ground_truth(std::size_t d, std::uint64_t data_seed) {
    ModelVector x_true(d);
    const KeyStream stream(data_seed, {static_cast<std::uint64_t>(Stream::data),
                                       kGroundTruth, 0});
    stream.fill_normals(x_true.data(), d, 0);
    const double n = norm(x_true);
    if (n > 0.0) scale(1.0 / n, x_true);
    return x_true;
}

std::unique_ptr<SigmoidRegressionObjective> make_sigmoid_regression(
    std::size_t d, std::size_t K, double noise_level, std::uint64_t data_seed) {
    if (d < 1 || K < 1) throw std::invalid_argument("make_sigmoid_regression: d, K >= 1");
    Dataset data;
    data.cols = d;
    data.features.resize(K * d);
    data.targets.resize(K);
    const ModelVector x_true = sigmoid_ground_truth(d, data_seed);
    for (std::size_t k = 0; k < K; ++k) {
        double* row = data.features.data() + k * d;
        const KeyStream row_stream(data_seed, {static_cast<std::uint64_t>(Stream::data),
                                               kFeatures, static_cast<std::uint64_t>(k)});
        row_stream.fill_normals(row, d, 0);
        const double t = kernels::active().dot(row, x_true.data(), d);
        double y = sigmoid(t);
        if (noise_level != 0.0) {
            const KeyStream noise_stream(data_seed,
                                         {static_cast<std::uint64_t>(Stream::data), kNoise,
                                          static_cast<std::uint64_t>(k)});
            y += noise_level * noise_stream.normal(0);
        }
        data.targets[k] = y;
    }
    return std::make_unique<SigmoidRegressionObjective>(std::move(data));
}

// ---------------------------------------------------------------------------
// Two-layer tanh network

namespace {

// Shared forward pass so the factory can run the teacher network with the
// same arithmetic the objective uses.
double net_forward(const double* a, std::size_t d_in, std::size_t h,
                   const ModelVector& params, std::vector<double>& hidden_out) {
    hidden_out.resize(h);
    const double* w1 = params.data();
    const double* b1 = params.data() + h * d_in;
    const double* w2 = b1 + h;
    const double b2 = *(w2 + h);
    for (std::size_t r = 0; r < h; ++r) {
        const double pre = kernels::active().dot(w1 + r * d_in, a, d_in) + b1[r];
        hidden_out[r] = std::tanh(pre);
    }
    return kernels::active().dot(w2, hidden_out.data(), h) + b2;
}

}  // namespace

TwoLayerTanhObjective::TwoLayerTanhObjective(std::size_t d_in, std::size_t hidden,
                                             Dataset data)
    : d_in_(d_in), hidden_(hidden), dim_(hidden * (d_in + 1) + hidden + 1),
      data_(std::move(data)) {
    if (d_in_ < 1 || hidden_ < 1) {
        throw std::invalid_argument("TwoLayerTanhObjective: d_in, hidden >= 1");
    }
    if (dim_ > 5000) {
        throw std::invalid_argument("TwoLayerTanhObjective: parameter count " +
                                    std::to_string(dim_) + " exceeds 5000");
    }
    if (data_.cols != d_in_ || data_.rows() < 1 ||
        data_.targets.size() != data_.rows()) {
        throw std::invalid_argument("TwoLayerTanhObjective: malformed dataset");
    }
    lipschitz_ = estimate_grad_lipschitz(*this, 20, kLipschitzKey);
}

double TwoLayerTanhObjective::forward(const ModelVector& x, std::size_t k,
                                      std::vector<double>& hidden_out) const {
    return net_forward(data_.row(k), d_in_, hidden_, x, hidden_out);
}

double TwoLayerTanhObjective::eval(const ModelVector& x, std::size_t k) const {
    std::vector<double> hidden_out;
    const double e = forward(x, k, hidden_out) - data_.targets[k];
    return e * e;
}

void TwoLayerTanhObjective::grad(const ModelVector& x, std::size_t k,
                                 ModelVector& out) const {
    std::vector<double> s;
    const double e = forward(x, k, s) - data_.targets[k];
    const double factor = 2.0 * e;
    const double* a = data_.row(k);
    const double* w2 = x.data() + hidden_ * d_in_ + hidden_;

    out.assign(dim_, 0.0);
    double* gw1 = out.data();
    double* gb1 = out.data() + hidden_ * d_in_;
    double* gw2 = gb1 + hidden_;
    double* gb2 = gw2 + hidden_;
    for (std::size_t r = 0; r < hidden_; ++r) {
        const double back = factor * w2[r] * (1.0 - s[r] * s[r]);
        kernels::active().scaled_copy(back, a, gw1 + r * d_in_, d_in_);
        gb1[r] = back;
        gw2[r] = factor * s[r];
    }
    *gb2 = factor;
}

std::unique_ptr<TwoLayerTanhObjective> make_two_layer_tanh(std::size_t d_in,
                                                           std::size_t hidden,
                                                           std::size_t K,
                                                           std::uint64_t data_seed) {
    if (K < 1) throw std::invalid_argument("make_two_layer_tanh: K >= 1");
    const std::size_t dim = hidden * (d_in + 1) + hidden + 1;

    ModelVector teacher(dim);
    const KeyStream teacher_stream(data_seed, {static_cast<std::uint64_t>(Stream::data),
                                               kGroundTruth, 0});
    teacher_stream.fill_normals(teacher.data(), dim, 0);
    // Keep the teacher in tanh's responsive range.
    kernels::active().scale(1.0 / std::sqrt(static_cast<double>(d_in)),
                            teacher.data(), hidden * d_in);
    kernels::active().scale(1.0 / std::sqrt(static_cast<double>(hidden)),
                            teacher.data() + hidden * (d_in + 1), hidden);

    Dataset data;
    data.cols = d_in;
    data.features.resize(K * d_in);
    data.targets.resize(K);
    std::vector<double> hidden_buf;
    for (std::size_t k = 0; k < K; ++k) {
        double* row = data.features.data() + k * d_in;
        const KeyStream row_stream(data_seed, {static_cast<std::uint64_t>(Stream::data),
                                               kFeatures, static_cast<std::uint64_t>(k)});
        row_stream.fill_normals(row, d_in, 0);
        data.targets[k] = net_forward(row, d_in, hidden, teacher, hidden_buf);
    }
    return std::make_unique<TwoLayerTanhObjective>(d_in, hidden, std::move(data));
}

// ---------------------------------------------------------------------------
// Attack loss

double ClassifierModel::score(std::size_t cls, const ModelVector& z) const {
    return kernels::active().dot(weights.data() + cls * input_dim, z.data(), input_dim) +
           biases[cls];
}

void ClassifierModel::validate() const {
    if (num_classes < 2) throw std::invalid_argument("ClassifierModel: need >= 2 classes");
    if (input_dim < 1) throw std::invalid_argument("ClassifierModel: input_dim >= 1");
    if (weights.size() != num_classes * input_dim || biases.size() != num_classes) {
        throw std::invalid_argument("ClassifierModel: shape mismatch");
    }
    for (double w : weights) {
        if (!std::isfinite(w)) throw std::invalid_argument("ClassifierModel: non-finite weight");
    }
    for (double b : biases) {
        if (!std::isfinite(b)) throw std::invalid_argument("ClassifierModel: non-finite bias");
    }
}

AttackLossObjective::AttackLossObjective(ClassifierModel model, Dataset images,
                                         std::vector<std::size_t> labels, double c)
    : model_(std::move(model)), images_(std::move(images)),
      labels_(std::move(labels)), c_(c) {
    model_.validate();
    if (!(c_ >= 0.0)) throw std::invalid_argument("AttackLossObjective: c must be >= 0");
    if (images_.cols != model_.input_dim) {
        throw std::invalid_argument("AttackLossObjective: image dim != classifier input dim");
    }
    if (labels_.size() != images_.rows() || labels_.empty()) {
        throw std::invalid_argument("AttackLossObjective: labels/images size mismatch");
    }
    for (std::size_t y : labels_) {
        if (y >= model_.num_classes) {
            throw std::invalid_argument("AttackLossObjective: label out of range");
        }
    }
    atanh2a_.resize(images_.features.size());
    for (std::size_t i = 0; i < images_.features.size(); ++i) {
        const double a = images_.features[i];
        if (!(std::abs(a) < 0.5)) {
            throw std::invalid_argument(
                "AttackLossObjective: image coordinate at or outside +/-0.5 "
                "(atanh(2a) undefined)");
        }
        atanh2a_[i] = std::atanh(2.0 * a);
    }
    lipschitz_ = estimate_grad_lipschitz(*this, 20, kLipschitzKey);
}

void AttackLossObjective::perturbed(const ModelVector& x, std::size_t k, ModelVector& z,
                                    ModelVector& dz) const {
    const std::size_t d = images_.cols;
    z.resize(d);
    dz.resize(d);
    const double* base = atanh2a_.data() + k * d;
    for (std::size_t p = 0; p < d; ++p) {
        const double th = std::tanh(base[p] + x[p]);
        z[p] = 0.5 * th;
        dz[p] = 0.5 * (1.0 - th * th);
    }
}

std::size_t AttackLossObjective::best_other(const ModelVector& z, std::size_t label,
                                            double* best, double* second) const {
    std::size_t arg = model_.num_classes;  // sentinel
    double b = -std::numeric_limits<double>::infinity();
    double s = b;
    for (std::size_t j = 0; j < model_.num_classes; ++j) {
        if (j == label) continue;
        const double v = model_.score(j, z);
        if (v > b) {
            s = b;
            b = v;
            arg = j;
        } else if (v > s) {
            s = v;
        }
    }
    if (best != nullptr) *best = b;
    if (second != nullptr) *second = s;
    return arg;
}

double AttackLossObjective::eval(const ModelVector& x, std::size_t k) const {
    ModelVector z, dz;
    perturbed(x, k, z, dz);
    double best;
    best_other(z, labels_[k], &best, nullptr);
    const double margin = model_.score(labels_[k], z) - best;
    const double* a = images_.row(k);
    double dist = 0.0;
    for (std::size_t p = 0; p < z.size(); ++p) {
        const double diff = z[p] - a[p];
        dist += diff * diff;
    }
    return c_ * std::max(0.0, margin) + dist;
}

void AttackLossObjective::grad(const ModelVector& x, std::size_t k, ModelVector& out) const {
    ModelVector z, dz;
    perturbed(x, k, z, dz);
    const std::size_t y = labels_[k];
    double best;
    const std::size_t rival = best_other(z, y, &best, nullptr);
    const double margin = model_.score(y, z) - best;
    const double* a = images_.row(k);
    const std::size_t d = z.size();
    out.resize(d);
    for (std::size_t p = 0; p < d; ++p) out[p] = 2.0 * (z[p] - a[p]) * dz[p];
    if (margin > 0.0) {
        const double* wy = model_.weights.data() + y * d;
        const double* wr = model_.weights.data() + rival * d;
        for (std::size_t p = 0; p < d; ++p) out[p] += c_ * (wy[p] - wr[p]) * dz[p];
    }
}

double AttackLossObjective::hinge_margin(const ModelVector& x, std::size_t k) const {
    ModelVector z, dz;
    perturbed(x, k, z, dz);
    double best;
    best_other(z, labels_[k], &best, nullptr);
    return model_.score(labels_[k], z) - best;
}

double AttackLossObjective::argmax_gap(const ModelVector& x, std::size_t k) const {
    ModelVector z, dz;
    perturbed(x, k, z, dz);
    double best, second;
    best_other(z, labels_[k], &best, &second);
    if (!std::isfinite(second)) return std::numeric_limits<double>::infinity();
    return best - second;
}

std::unique_ptr<AttackLossObjective> make_attack_loss(ClassifierModel model, Dataset images,
                                                      std::vector<std::size_t> labels,
                                                      double c) {
    return std::make_unique<AttackLossObjective>(std::move(model), std::move(images),
                                                 std::move(labels), c);
}

}  // namespace hosgd
