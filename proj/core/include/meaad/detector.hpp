#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "meaad/context_features.hpp"
#include "meaad/mlp.hpp"
#include "meaad/retrieval.hpp"

namespace meaad {

/// Scalar used by the production detector network.
using DetectorReal = float;

struct LabeledExample {
    QueryId query_id = 0;
    std::vector<double> feature;
    int label = 0;  // 0 benign, 1 adversarial
};

/// Examples sharing one (N, K) layout and block selection.
struct FeatureDataset {
    FeatureLayout layout;
    FeatureBlocks blocks;
    std::vector<LabeledExample> examples;

    std::size_t dimension() const noexcept { return layout.dimension(blocks); }
    std::size_t count(int label) const noexcept;
};

struct DetectorModel {
    Mlp<DetectorReal> network;
    SgdConfig hyperparams;
    FeatureLayout layout;  // (N, K) the detector was trained for
    FeatureBlocks blocks;

    std::size_t input_dim() const noexcept { return network.input_dim(); }
};

struct TrainedDetector {
    DetectorModel model;
    std::vector<double> batch_losses;
    double initial_loss = 0.0;
    double final_loss = 0.0;
};

/// Trains the d -> hidden... -> 1 detector on `examples` (both classes required).
TrainedDetector train_detector(std::span<const LabeledExample> examples, const SgdConfig& config);

/// Convenience overload that also stamps the dataset's layout onto the model.
TrainedDetector train_detector(const FeatureDataset& dataset, const SgdConfig& config);

/// Attack probability in (0, 1).
double mlp_forward(const DetectorModel& model, std::span<const double> x);

struct Prediction {
    int label = 0;
    double probability = 0.0;
    double logit = 0.0;
};

/// label = 1 iff probability >= threshold.
Prediction predict(const DetectorModel& model, std::span<const double> x, double threshold = 0.5);

/// Probabilities (and logits) for a whole dataset in one batched pass.
std::vector<Prediction> predict_all(const DetectorModel& model, std::span<const LabeledExample> examples,
                                    double threshold = 0.5);

struct VoteResult {
    int label = 0;
    std::size_t common_count = 0;
};

/// |intersection of all support id sets|; attack iff common_count < threshold.
VoteResult voting_detect(std::span<const SupportSet> supports, std::size_t threshold = 5);

}  // namespace meaad
