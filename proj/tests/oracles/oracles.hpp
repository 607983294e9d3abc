#pragma once

// Independent reference implementations used as test oracles. They share no
// code with the library beyond plain data types and favor obvious loops over
// speed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

inline double plain_dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Vec unit(const Vec& v) {
    const double n = std::sqrt(plain_dot(v, v));
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
    return out;
}

inline Vec random_unit(std::mt19937_64& rng, std::size_t d) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vec v(d);
    for (auto& x : v) x = g(rng);
    return unit(v);
}

struct Item {
    std::uint64_t id;
    Vec embedding;
};

/// Sorts the whole gallery by (-similarity, id) and keeps the first k eligible ids.
inline std::vector<std::uint64_t> full_sort_top_k(const std::vector<Item>& gallery, const Vec& query, std::size_t k,
                                                  const std::vector<std::uint64_t>& exclude = {}) {
    std::vector<std::pair<double, std::uint64_t>> keyed;
    for (const auto& item : gallery) {
        if (std::find(exclude.begin(), exclude.end(), item.id) != exclude.end()) continue;
        keyed.emplace_back(-plain_dot(item.embedding, query), item.id);
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < k && i < keyed.size(); ++i) out.push_back(keyed[i].second);
    return out;
}

/// One expert's view for the feature oracle: query embedding plus ranked supports.
struct ExpertView {
    Vec query;
    std::vector<std::uint64_t> ids;
    std::vector<Vec> supports;
};

/// Query-support, support-support and cross-expert affinities written out
/// directly from their definitions, concatenated block by block.
inline Vec context_feature(const std::vector<ExpertView>& experts) {
    const std::size_t n = experts.size();
    const std::size_t k = experts.front().ids.size();
    Vec out;
    for (const auto& e : experts) {
        for (std::size_t j = 0; j < k; ++j) out.push_back(plain_dot(e.query, e.supports[j]));
    }
    for (const auto& e : experts) {
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = a + 1; b < k; ++b) out.push_back(plain_dot(e.supports[a], e.supports[b]));
        }
    }
    if (n >= 2) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                int hits = 0;
                for (std::size_t other = 0; other < n; ++other) {
                    if (other == i) continue;
                    const auto& ids = experts[other].ids;
                    if (std::find(ids.begin(), ids.end(), experts[i].ids[j]) != ids.end()) ++hits;
                }
                out.push_back(static_cast<double>(hits) / static_cast<double>(n - 1));
            }
        }
    }
    return out;
}

/// P(score_pos > score_neg) + 0.5 P(tie) over all positive/negative pairs.
inline double mann_whitney_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            pairs += 1.0;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / pairs;
}

/// Dense layer in row-major nested vectors: weights[out][in].
struct DenseLayer {
    std::vector<Vec> weights;
    Vec bias;
};

/// Logit of a ReLU MLP computed one neuron at a time.
inline double mlp_logit(const std::vector<DenseLayer>& layers, const Vec& x) {
    Vec a = x;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Vec next(layers[l].bias.size());
        for (std::size_t o = 0; o < next.size(); ++o) {
            double s = layers[l].bias[o];
            for (std::size_t i = 0; i < a.size(); ++i) s += layers[l].weights[o][i] * a[i];
            next[o] = (l + 1 < layers.size()) ? std::max(s, 0.0) : s;
        }
        a = std::move(next);
    }
    return a[0];
}

/// Mean binary cross-entropy from logits, computed from the probability directly.
inline double mean_bce(const std::vector<DenseLayer>& layers, const std::vector<Vec>& xs, const std::vector<int>& ys) {
    double total = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double p = 1.0 / (1.0 + std::exp(-mlp_logit(layers, xs[i])));
        total += ys[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
    }
    return total / static_cast<double>(xs.size());
}

/// Rosenblatt perceptron with bias. Returns true when it reaches zero training
/// errors, which certifies linear separability.
inline bool perceptron_separates(const std::vector<Vec>& xs, const std::vector<int>& ys, int max_epochs = 1000) {
    Vec w(xs.front().size(), 0.0);
    double b = 0.0;
    for (int epoch = 0; epoch < max_epochs; ++epoch) {
        int errors = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double y = ys[i] == 1 ? 1.0 : -1.0;
            if (y * (plain_dot(w, xs[i]) + b) <= 0.0) {
                for (std::size_t j = 0; j < w.size(); ++j) w[j] += y * xs[i][j];
                b += y;
                ++errors;
            }
        }
        if (errors == 0) return true;
    }
    return false;
}

}  // namespace oracle
