#include "meaad/metrics.hpp"
#include "support.hpp"

using namespace meaad;
using testutil::error_code_of;

TEST(Confusion, PerfectPredictions) {
    const std::vector<int> y{1, 0, 1, 0};
    const auto r = confusion_and_f1(y, y);
    EXPECT_EQ(r.accuracy, 1.0);
    EXPECT_EQ(r.f1, 1.0);
}

TEST(Confusion, AllNegativePredictions) {
    const std::vector<int> p{0, 0, 0, 0}, y{1, 0, 1, 0};
    const auto r = confusion_and_f1(p, y);
    EXPECT_EQ(r.recall, 0.0);
    EXPECT_EQ(r.f1, 0.0);
    EXPECT_EQ(r.accuracy, 0.5);
}

TEST(Confusion, HalfRight) {
    const std::vector<int> p{1, 1, 0, 0}, y{1, 0, 1, 0};
    const auto r = confusion_and_f1(p, y);
    EXPECT_EQ(r.precision, 0.5);
    EXPECT_EQ(r.recall, 0.5);
    EXPECT_EQ(r.f1, 0.5);
    EXPECT_EQ(r.accuracy, 0.5);
    EXPECT_EQ(r.counts.tp, 1u);
    EXPECT_EQ(r.counts.fp, 1u);
    EXPECT_EQ(r.counts.tn, 1u);
    EXPECT_EQ(r.counts.fn, 1u);
}

TEST(Confusion, Errors) {
    const std::vector<int> a{1, 0}, b{1};
    EXPECT_EQ(error_code_of([&] { confusion_and_f1(a, b); }), ErrorCode::LengthMismatch);
    EXPECT_EQ(error_code_of([&] { confusion_and_f1(std::vector<int>{}, std::vector<int>{}); }), ErrorCode::Empty);
}

TEST(Auc, HandCases) {
    EXPECT_EQ(roc_auc(std::vector<double>{0.9, 0.1}, std::vector<int>{1, 0}).auc, 1.0);
    EXPECT_EQ(roc_auc(std::vector<double>{0.3, 0.3, 0.3, 0.3}, std::vector<int>{1, 0, 0, 1}).auc, 0.5);
    EXPECT_EQ(roc_auc(std::vector<double>{0.8, 0.7, 0.6, 0.4}, std::vector<int>{1, 0, 1, 0}).auc, 0.75);
}

TEST(Auc, CurveEndpoints) {
    const auto r = roc_auc(std::vector<double>{0.8, 0.7, 0.6, 0.4}, std::vector<int>{1, 0, 1, 0});
    ASSERT_GE(r.points.size(), 2u);
    EXPECT_EQ(r.points.front().false_positive_rate, 0.0);
    EXPECT_EQ(r.points.front().true_positive_rate, 0.0);
    EXPECT_EQ(r.points.back().false_positive_rate, 1.0);
    EXPECT_EQ(r.points.back().true_positive_rate, 1.0);
}

TEST(Auc, EqualsMannWhitneyWithTies) {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> level(0, 9), coin(0, 1);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> s;
        std::vector<int> y{0, 1};
        s = {static_cast<double>(level(rng)), static_cast<double>(level(rng))};
        for (int i = 0; i < 30; ++i) {
            s.push_back(static_cast<double>(level(rng)) / 10.0);
            y.push_back(coin(rng));
        }
        s[0] /= 10.0;
        s[1] /= 10.0;
        EXPECT_NEAR(roc_auc(s, y).auc, oracle::mann_whitney_auc(s, y), 1e-12);
    }
}

TEST(Auc, InvariantUnderMonotoneTransform) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    std::vector<double> s, e;
    std::vector<int> y;
    for (int i = 0; i < 100; ++i) {
        s.push_back(g(rng));
        e.push_back(std::exp(3.0 * s.back()));
        y.push_back(i % 3 == 0);
    }
    EXPECT_EQ(roc_auc(s, y).auc, roc_auc(e, y).auc);
}

TEST(Auc, Errors) {
    EXPECT_EQ(error_code_of([] { roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}); }),
              ErrorCode::SingleClassDataset);
    EXPECT_EQ(error_code_of([] { roc_auc(std::vector<double>{0.1}, std::vector<int>{1, 0}); }),
              ErrorCode::LengthMismatch);
}

TEST(Evaluate, PerfectDetector) {
    const std::vector<int> y{1, 0, 1, 0, 0};
    const std::vector<double> s{0.9, 0.1, 0.8, 0.2, 0.3};
    const auto r = evaluate(y, s, y);
    EXPECT_EQ(r.accuracy, 1.0);
    EXPECT_EQ(r.roc_auc, 1.0);
    EXPECT_EQ(r.f1, 1.0);
}
