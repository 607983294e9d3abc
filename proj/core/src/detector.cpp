#include "meaad/detector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "meaad/error.hpp"

namespace meaad {

std::size_t FeatureDataset::count(int label) const noexcept {
    return static_cast<std::size_t>(std::count_if(examples.begin(), examples.end(),
                                                  [label](const auto& e) { return e.label == label; }));
}

TrainedDetector train_detector(std::span<const LabeledExample> examples, const SgdConfig& config) {
    using Net = Mlp<DetectorReal>;
    if (examples.empty()) throw Error(ErrorCode::Empty, "training set is empty");
    const std::size_t d = examples.front().feature.size();
    if (d == 0) throw Error(ErrorCode::DimensionMismatch, "features are empty");

    bool has_benign = false;
    bool has_attack = false;
    Net::Matrix x(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(examples.size()));
    Net::RowVector y(static_cast<Eigen::Index>(examples.size()));
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const auto& e = examples[i];
        if (e.feature.size() != d) {
            throw Error(ErrorCode::DimensionMismatch, "example " + std::to_string(e.query_id) + " has " +
                                                          std::to_string(e.feature.size()) + " features, expected " +
                                                          std::to_string(d));
        }
        if (e.label != 0 && e.label != 1) throw Error(ErrorCode::Parse, "labels must be 0 or 1");
        (e.label == 1 ? has_attack : has_benign) = true;
        for (std::size_t j = 0; j < d; ++j) {
            x(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = static_cast<DetectorReal>(e.feature[j]);
        }
        y(static_cast<Eigen::Index>(i)) = static_cast<DetectorReal>(e.label);
    }
    if (!has_benign || !has_attack) {
        throw Error(ErrorCode::SingleClassDataset, "training set must contain both classes");
    }

    auto fit = train_mlp<DetectorReal>(x, y, config);
    TrainedDetector out;
    out.model.network = std::move(fit.model);
    out.model.hyperparams = config;
    out.batch_losses = std::move(fit.batch_losses);
    out.initial_loss = fit.initial_loss;
    out.final_loss = fit.final_loss;
    return out;
}

TrainedDetector train_detector(const FeatureDataset& dataset, const SgdConfig& config) {
    for (const auto& e : dataset.examples) {
        if (e.feature.size() != dataset.dimension()) {
            throw Error(ErrorCode::DimensionMismatch, "dataset example does not match its layout");
        }
    }
    TrainedDetector out = train_detector(std::span<const LabeledExample>(dataset.examples), config);
    out.model.layout = dataset.layout;
    out.model.blocks = dataset.blocks;
    return out;
}

double mlp_forward(const DetectorModel& model, std::span<const double> x) {
    return sigmoid_probability(static_cast<double>(model.network.logit(x)));
}

Prediction predict(const DetectorModel& model, std::span<const double> x, double threshold) {
    const double z = static_cast<double>(model.network.logit(x));
    const double p = sigmoid_probability(z);
    return {p >= threshold ? 1 : 0, p, z};
}

std::vector<Prediction> predict_all(const DetectorModel& model, std::span<const LabeledExample> examples,
                                    double threshold) {
    using Net = Mlp<DetectorReal>;
    std::vector<Prediction> out;
    if (examples.empty()) return out;
    const std::size_t d = model.input_dim();
    Net::Matrix x(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(examples.size()));
    for (std::size_t i = 0; i < examples.size(); ++i) {
        if (examples[i].feature.size() != d) {
            throw Error(ErrorCode::DimensionMismatch, "example has " + std::to_string(examples[i].feature.size()) +
                                                          " features, model expects " + std::to_string(d));
        }
        for (std::size_t j = 0; j < d; ++j) {
            x(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
                static_cast<DetectorReal>(examples[i].feature[j]);
        }
    }
    Net::Workspace ws;
    const Net::RowVector z = model.network.logits(x, ws);
    out.reserve(examples.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double zi = static_cast<double>(z(i));
        if (!std::isfinite(zi)) throw Error(ErrorCode::NonFinite, "network produced a non-finite logit");
        const double p = sigmoid_probability(zi);
        out.push_back({p >= threshold ? 1 : 0, p, zi});
    }
    return out;
}

VoteResult voting_detect(std::span<const SupportSet> supports, std::size_t threshold) {
    if (supports.size() < 2) throw Error(ErrorCode::SingleExpert, "voting needs at least 2 experts");
    const std::size_t k = supports.front().size();
    std::vector<ItemId> common = supports.front().item_ids();
    std::sort(common.begin(), common.end());
    common.erase(std::unique(common.begin(), common.end()), common.end());
    for (std::size_t i = 1; i < supports.size(); ++i) {
        if (supports[i].size() != k) throw Error(ErrorCode::MismatchedSupportSizes, "support sets differ in size");
        auto ids = supports[i].item_ids();
        std::sort(ids.begin(), ids.end());
        std::vector<ItemId> next;
        std::set_intersection(common.begin(), common.end(), ids.begin(), ids.end(), std::back_inserter(next));
        common = std::move(next);
    }
    return {common.size() < threshold ? 1 : 0, common.size()};
}

}  // namespace meaad
