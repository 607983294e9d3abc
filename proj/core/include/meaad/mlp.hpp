#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "meaad/error.hpp"

namespace meaad {

/// Fully connected ReLU network with a single logit output.
///
/// Weights are stored out x in (column-major Eigen matrices); a batch is a
/// d x B matrix with one example per column. The scalar type is a template
/// parameter so the same code backs both the 64-bit reference used by the
/// gradient checks and the 32-bit production detector.
template <typename Real>
class Mlp {
public:
    using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
    using RowVector = Eigen::Matrix<Real, 1, Eigen::Dynamic>;

    struct Layer {
        Matrix weights;  // out x in
        Vector bias;     // out
    };

    /// Scratch buffers reused across batches of the same size.
    struct Workspace {
        std::vector<Matrix> pre;   // pre-activations per layer
        std::vector<Matrix> post;  // ReLU outputs per hidden layer
        Matrix delta;
        Matrix back;
    };

    Mlp() = default;
    explicit Mlp(std::vector<Layer> layers);

    /// All weights and biases zero.
    static Mlp zeros(std::size_t input_dim, std::span<const std::size_t> hidden);

    /// Uniform(-sqrt(6/(fan_in+fan_out)), +sqrt(...)) weights, zero biases.
    static Mlp glorot_uniform(std::size_t input_dim, std::span<const std::size_t> hidden,
                              std::mt19937_64& rng);

    std::size_t input_dim() const noexcept {
        return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.front().weights.cols());
    }
    const std::vector<Layer>& layers() const noexcept { return layers_; }
    std::vector<Layer>& layers() noexcept { return layers_; }
    std::size_t parameter_count() const noexcept;

    /// Logits for every column of `inputs`.
    RowVector logits(const Eigen::Ref<const Matrix>& inputs, Workspace& ws) const;
    Real logit(std::span<const double> x) const;

    /// Mean binary cross-entropy of the batch; fills `grads` (same shapes as
    /// the layers) with its gradient. `labels` holds 0/1 per column.
    double loss_and_gradients(const Eigen::Ref<const Matrix>& inputs, const RowVector& labels,
                              std::vector<Layer>& grads, Workspace& ws) const;

    double loss(const Eigen::Ref<const Matrix>& inputs, const RowVector& labels, Workspace& ws) const;

    bool all_finite() const noexcept;

private:
    std::vector<Layer> layers_;
};

/// Numerically stable logistic function in 64-bit, kept strictly inside (0, 1).
inline double sigmoid_probability(double logit) noexcept {
    const double p = logit >= 0.0 ? 1.0 / (1.0 + std::exp(-logit))
                                  : std::exp(logit) / (1.0 + std::exp(logit));
    constexpr double lo = std::numeric_limits<double>::min();
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
    return p < lo ? lo : (p > hi ? hi : p);
}

/// log(1 + exp(z)) - y z, the per-example BCE on a logit.
inline double bce_on_logit(double z, double y) noexcept {
    return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

struct SgdConfig {
    double learning_rate = 1e-4;
    double momentum = 0.9;
    std::size_t batch_size = 1024;
    std::size_t iterations = 5000;
    std::uint64_t seed = 0;
    std::vector<std::size_t> hidden = {512, 256};
};

template <typename Real>
struct SgdResult {
    Mlp<Real> model;
    std::vector<double> batch_losses;  // loss of each sampled batch before its update
    double initial_loss = 0.0;         // full-dataset loss at initialization
    double final_loss = 0.0;           // full-dataset loss after the last update
};

/// Trains from scratch with classical momentum SGD on mean BCE.
///
/// `features` is d x M (one example per column), `labels` 1 x M. Weights are
/// initialized from the seeded generator, then every iteration draws
/// `batch_size` column indices uniformly with replacement from the same
/// generator. Single-threaded and bitwise deterministic for fixed inputs.
template <typename Real>
SgdResult<Real> train_mlp(const typename Mlp<Real>::Matrix& features,
                          const typename Mlp<Real>::RowVector& labels, const SgdConfig& config);

// ---------------------------------------------------------------------------

template <typename Real>
Mlp<Real>::Mlp(std::vector<Layer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw Error(ErrorCode::InvalidConfig, "network has no layers");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        if (layer.bias.size() != layer.weights.rows()) {
            throw Error(ErrorCode::DimensionMismatch, "bias length does not match layer " + std::to_string(l));
        }
        if (l > 0 && layer.weights.cols() != layers_[l - 1].weights.rows()) {
            throw Error(ErrorCode::DimensionMismatch, "layer " + std::to_string(l) + " input width mismatch");
        }
    }
    if (layers_.back().weights.rows() != 1) {
        throw Error(ErrorCode::DimensionMismatch, "output layer must have one unit");
    }
}

template <typename Real>
Mlp<Real> Mlp<Real>::zeros(std::size_t input_dim, std::span<const std::size_t> hidden) {
    std::vector<Layer> layers;
    std::size_t in = input_dim;
    for (std::size_t width : hidden) {
        layers.push_back({Matrix::Zero(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(in)),
                          Vector::Zero(static_cast<Eigen::Index>(width))});
        in = width;
    }
    layers.push_back({Matrix::Zero(1, static_cast<Eigen::Index>(in)), Vector::Zero(1)});
    return Mlp(std::move(layers));
}

template <typename Real>
Mlp<Real> Mlp<Real>::glorot_uniform(std::size_t input_dim, std::span<const std::size_t> hidden,
                                    std::mt19937_64& rng) {
    Mlp net = zeros(input_dim, hidden);
    for (auto& layer : net.layers_) {
        const double fan_in = static_cast<double>(layer.weights.cols());
        const double fan_out = static_cast<double>(layer.weights.rows());
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        // Row-major fill order so the draw sequence does not depend on storage order.
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
                layer.weights(r, c) = static_cast<Real>(dist(rng));
            }
        }
    }
    return net;
}

template <typename Real>
std::size_t Mlp<Real>::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return n;
}

template <typename Real>
typename Mlp<Real>::RowVector Mlp<Real>::logits(const Eigen::Ref<const Matrix>& inputs,
                                                Workspace& ws) const {
    if (static_cast<std::size_t>(inputs.rows()) != input_dim()) {
        throw Error(ErrorCode::DimensionMismatch, "input has " + std::to_string(inputs.rows()) +
                                                      " features, network expects " +
                                                      std::to_string(input_dim()));
    }
    const std::size_t n_layers = layers_.size();
    ws.pre.resize(n_layers);
    ws.post.resize(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        const Layer& layer = layers_[l];
        if (l == 0) {
            ws.pre[l].noalias() = layer.weights * inputs;
        } else {
            ws.pre[l].noalias() = layer.weights * ws.post[l - 1];
        }
        ws.pre[l].colwise() += layer.bias;
        if (l + 1 < n_layers) ws.post[l] = ws.pre[l].cwiseMax(Real(0));
    }
    return ws.pre.back();
}

template <typename Real>
Real Mlp<Real>::logit(std::span<const double> x) const {
    if (x.size() != input_dim()) {
        throw Error(ErrorCode::DimensionMismatch, "input has " + std::to_string(x.size()) +
                                                      " features, network expects " +
                                                      std::to_string(input_dim()));
    }
    Matrix column(static_cast<Eigen::Index>(x.size()), 1);
    for (std::size_t i = 0; i < x.size(); ++i) column(static_cast<Eigen::Index>(i), 0) = static_cast<Real>(x[i]);
    Workspace ws;
    const Real z = logits(column, ws)(0);
    if (!std::isfinite(static_cast<double>(z))) throw Error(ErrorCode::NonFinite, "network produced a non-finite logit");
    return z;
}

template <typename Real>
double Mlp<Real>::loss_and_gradients(const Eigen::Ref<const Matrix>& inputs, const RowVector& labels,
                                     std::vector<Layer>& grads, Workspace& ws) const {
    const RowVector z = logits(inputs, ws);
    const Eigen::Index batch = inputs.cols();
    if (labels.size() != batch) throw Error(ErrorCode::LengthMismatch, "labels do not match batch");
    const Real inv_batch = Real(1) / static_cast<Real>(batch);

    double total = 0.0;
    ws.delta.resize(1, batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
        const double zb = static_cast<double>(z(b));
        const double yb = static_cast<double>(labels(b));
        total += bce_on_logit(zb, yb);
        const double p = zb >= 0.0 ? 1.0 / (1.0 + std::exp(-zb)) : std::exp(zb) / (1.0 + std::exp(zb));
        ws.delta(0, b) = static_cast<Real>(p - yb) * inv_batch;
    }

    grads.resize(layers_.size());
    for (std::size_t l = layers_.size(); l-- > 0;) {
        if (l == 0) {
            grads[l].weights.noalias() = ws.delta * inputs.transpose();
        } else {
            grads[l].weights.noalias() = ws.delta * ws.post[l - 1].transpose();
        }
        grads[l].bias = ws.delta.rowwise().sum();
        if (l > 0) {
            ws.back.noalias() = layers_[l].weights.transpose() * ws.delta;
            ws.delta = ws.back.cwiseProduct((ws.pre[l - 1].array() > Real(0)).matrix().template cast<Real>());
        }
    }
    return total / static_cast<double>(batch);
}

template <typename Real>
double Mlp<Real>::loss(const Eigen::Ref<const Matrix>& inputs, const RowVector& labels, Workspace& ws) const {
    const RowVector z = logits(inputs, ws);
    if (labels.size() != z.size()) throw Error(ErrorCode::LengthMismatch, "labels do not match batch");
    double total = 0.0;
    for (Eigen::Index b = 0; b < z.size(); ++b) {
        total += bce_on_logit(static_cast<double>(z(b)), static_cast<double>(labels(b)));
    }
    return total / static_cast<double>(z.size());
}

template <typename Real>
bool Mlp<Real>::all_finite() const noexcept {
    for (const auto& l : layers_) {
        if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
    }
    return true;
}

template <typename Real>
SgdResult<Real> train_mlp(const typename Mlp<Real>::Matrix& features,
                          const typename Mlp<Real>::RowVector& labels, const SgdConfig& config) {
    using Net = Mlp<Real>;
    const Eigen::Index m = features.cols();
    if (m == 0) throw Error(ErrorCode::Empty, "training set is empty");
    if (labels.size() != m) throw Error(ErrorCode::LengthMismatch, "labels do not match features");
    if (config.batch_size == 0 || !(config.learning_rate > 0.0) || !(config.momentum >= 0.0) ||
        !(config.momentum < 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "invalid SGD hyperparameters");
    }

    std::mt19937_64 rng(config.seed);
    SgdResult<Real> result;
    result.model = Net::glorot_uniform(static_cast<std::size_t>(features.rows()), config.hidden, rng);
    Net& net = result.model;

    typename Net::Workspace ws;
    result.initial_loss = net.loss(features, labels, ws);

    std::vector<typename Net::Layer> grads(net.layers().size());
    std::vector<typename Net::Layer> velocity;
    for (const auto& layer : net.layers()) {
        velocity.push_back({Net::Matrix::Zero(layer.weights.rows(), layer.weights.cols()),
                            Net::Vector::Zero(layer.bias.size())});
    }

    const auto batch = static_cast<Eigen::Index>(config.batch_size);
    typename Net::Matrix x(features.rows(), batch);
    typename Net::RowVector y(batch);
    std::uniform_int_distribution<Eigen::Index> pick(0, m - 1);
    const Real lr = static_cast<Real>(config.learning_rate);
    const Real mu = static_cast<Real>(config.momentum);

    result.batch_losses.reserve(config.iterations);
    for (std::size_t it = 0; it < config.iterations; ++it) {
        for (Eigen::Index b = 0; b < batch; ++b) {
            const Eigen::Index idx = pick(rng);
            x.col(b) = features.col(idx);
            y(b) = labels(idx);
        }
        const double batch_loss = net.loss_and_gradients(x, y, grads, ws);
        if (!std::isfinite(batch_loss)) {
            throw Error(ErrorCode::NonFinite, "training loss diverged at iteration " + std::to_string(it));
        }
        result.batch_losses.push_back(batch_loss);
        for (std::size_t l = 0; l < grads.size(); ++l) {
            auto& layer = net.layers()[l];
            velocity[l].weights = mu * velocity[l].weights - lr * grads[l].weights;
            velocity[l].bias = mu * velocity[l].bias - lr * grads[l].bias;
            layer.weights += velocity[l].weights;
            layer.bias += velocity[l].bias;
        }
    }
    if (!net.all_finite()) throw Error(ErrorCode::NonFinite, "training produced non-finite weights");
    result.final_loss = net.loss(features, labels, ws);
    return result;
}

extern template class Mlp<float>;
extern template class Mlp<double>;
extern template SgdResult<float> train_mlp<float>(const Mlp<float>::Matrix&, const Mlp<float>::RowVector&,
                                                  const SgdConfig&);
extern template SgdResult<double> train_mlp<double>(const Mlp<double>::Matrix&,
                                                    const Mlp<double>::RowVector&, const SgdConfig&);

}  // namespace meaad
