#include "meaad/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "meaad/error.hpp"

namespace meaad {

namespace {

double ratio(std::size_t num, std::size_t den) noexcept {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void check_labels(std::span<const int> labels) {
    for (int y : labels) {
        if (y != 0 && y != 1) throw Error(ErrorCode::Parse, "labels must be 0 or 1");
    }
}

}  // namespace

MetricsReport confusion_and_f1(std::span<const int> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size()) {
        throw Error(ErrorCode::LengthMismatch, "predictions and labels differ in length");
    }
    if (labels.empty()) throw Error(ErrorCode::Empty, "no samples to evaluate");
    check_labels(labels);
    check_labels(predictions);

    MetricsReport r;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool pred = predictions[i] == 1;
        const bool truth = labels[i] == 1;
        if (pred && truth) ++r.counts.tp;
        else if (pred) ++r.counts.fp;
        else if (truth) ++r.counts.fn;
        else ++r.counts.tn;
    }
    const auto& c = r.counts;
    r.accuracy = ratio(c.tp + c.tn, c.total());
    r.precision = ratio(c.tp, c.tp + c.fp);
    r.recall = ratio(c.tp, c.tp + c.fn);
    const double denom = r.precision + r.recall;
    r.f1 = denom > 0.0 ? 2.0 * r.precision * r.recall / denom : 0.0;
    return r;
}

RocResult roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw Error(ErrorCode::LengthMismatch, "scores and labels differ in length");
    check_labels(labels);
    for (double s : scores) {
        if (std::isnan(s)) throw Error(ErrorCode::NonFinite, "score is NaN");
    }
    const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    const std::size_t negatives = labels.size() - positives;
    if (positives == 0 || negatives == 0) {
        throw Error(ErrorCode::SingleClassDataset, "ROC needs both classes");
    }

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocResult out;
    out.points.push_back({0.0, 0.0});
    std::size_t tp = 0;
    std::size_t fp = 0;
    double area = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double threshold = scores[order[i]];
        const std::size_t tp_before = tp;
        const std::size_t fp_before = fp;
        for (; i < order.size() && scores[order[i]] == threshold; ++i) {
            (labels[order[i]] == 1 ? tp : fp) += 1;
        }
        // Trapezoid in count units; divided by P*N once at the end.
        area += static_cast<double>(fp - fp_before) * static_cast<double>(tp + tp_before) / 2.0;
        out.points.push_back({ratio(fp, negatives), ratio(tp, positives)});
    }
    out.auc = area / (static_cast<double>(positives) * static_cast<double>(negatives));
    return out;
}

MetricsReport evaluate(std::span<const int> predictions, std::span<const double> scores,
                       std::span<const int> labels) {
    MetricsReport r = confusion_and_f1(predictions, labels);
    RocResult roc = roc_auc(scores, labels);
    r.roc_auc = roc.auc;
    r.roc_points = std::move(roc.points);
    return r;
}

}  // namespace meaad
