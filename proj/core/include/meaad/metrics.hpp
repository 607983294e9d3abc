#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace meaad {

struct RocPoint {
    double false_positive_rate = 0.0;
    double true_positive_rate = 0.0;
};

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const noexcept { return tp + fp + tn + fn; }
};

/// Detection metrics with "attack" (label 1) as the positive class.
struct MetricsReport {
    ConfusionCounts counts;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double roc_auc = 0.0;
    std::vector<RocPoint> roc_points;
};

/// Confusion counts, accuracy, precision, recall and F1. Zero denominators yield 0.
MetricsReport confusion_and_f1(std::span<const int> predictions, std::span<const int> labels);

struct RocResult {
    double auc = 0.0;
    std::vector<RocPoint> points;  // (0,0) ... (1,1), one point per distinct score
};

/// ROC curve swept over every distinct score, and its trapezoidal area.
/// Tied scores form a single step, so the area equals the Mann-Whitney
/// statistic with ties counted one half.
RocResult roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Full report: thresholded metrics from `predictions`, ranking metrics from `scores`.
MetricsReport evaluate(std::span<const int> predictions, std::span<const double> scores,
                       std::span<const int> labels);

}  // namespace meaad
