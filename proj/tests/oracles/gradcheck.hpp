#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "meaad/mlp.hpp"

namespace oracle {

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::size_t parameters = 0;
};

/// Compares analytic BCE gradients of a 64-bit MLP against central
/// differences of the loss, one parameter at a time.
inline GradCheckResult check_gradients(const meaad::Mlp<double>& net, const meaad::Mlp<double>::Matrix& x,
                                       const meaad::Mlp<double>::RowVector& y, double h = 1e-5) {
    using Net = meaad::Mlp<double>;
    Net::Workspace ws;
    std::vector<Net::Layer> grads;
    net.loss_and_gradients(x, y, grads, ws);

    GradCheckResult out;
    Net probe = net;
    auto compare = [&](double& param, double analytic) {
        const double saved = param;
        param = saved + h;
        const double up = probe.loss(x, y, ws);
        param = saved - h;
        const double down = probe.loss(x, y, ws);
        param = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
        out.max_relative_error = std::max(out.max_relative_error, std::abs(analytic - numeric) / scale);
        ++out.parameters;
    };
    for (std::size_t l = 0; l < probe.layers().size(); ++l) {
        auto& layer = probe.layers()[l];
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) compare(layer.weights(r, c), grads[l].weights(r, c));
            compare(layer.bias(r), grads[l].bias(r));
        }
    }
    return out;
}

/// A random network with biases drawn too, so that no hidden unit sits on its ReLU kink by construction.
inline meaad::Mlp<double> random_mlp(std::mt19937_64& rng, std::size_t d, const std::vector<std::size_t>& hidden) {
    auto net = meaad::Mlp<double>::glorot_uniform(d, hidden, rng);
    std::uniform_real_distribution<double> b(-0.5, 0.5);
    for (auto& layer : net.layers()) {
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = b(rng);
    }
    return net;
}

}  // namespace oracle
