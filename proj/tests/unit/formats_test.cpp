#include <sstream>

#include "meaad/formats.hpp"
#include "meaad/scenario.hpp"
#include "support.hpp"

using namespace meaad;
using testutil::error_code_of;

namespace {

Scenario tiny() {
    ScenarioConfig c;
    c.n_identities = 4;
    c.items_per_identity = 5;
    c.n_experts = 2;
    c.dimension = 6;
    c.queries_per_identity = 2;
    return generate_scenario(c);
}

template <typename Reader>
ErrorCode parse_error(const std::string& text, Reader read) {
    return error_code_of([&] {
        std::istringstream is(text);
        read(is);
    });
}

}  // namespace

TEST(Reals, ShortestRoundTrip) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng) * std::pow(10.0, i % 20 - 10);
        EXPECT_EQ(parse_double(format_real(x)), x);
        const float f = static_cast<float>(x);
        EXPECT_EQ(parse_float(format_real(f)), f);
    }
    EXPECT_EQ(format_real(0.5), "0.5");
    EXPECT_EQ(error_code_of([] { parse_double("1.5x"); }), ErrorCode::Parse);
    EXPECT_EQ(error_code_of([] { parse_double("nan"); }), ErrorCode::NonFinite);
}

TEST(EmbeddingTable, RoundTrip) {
    const Scenario s = tiny();
    std::ostringstream os;
    write_expert_index(os, s.experts[1]);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "MEAAD-EMB v1 dim=6 expert=1");
    std::istringstream is(os.str());
    const ExpertIndex back = read_expert_index(is);
    ASSERT_EQ(back.size(), s.experts[1].size());
    EXPECT_EQ(back.expert_id(), 1u);
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_EQ(back.items()[i].item_id, s.experts[1].items()[i].item_id);
        EXPECT_EQ(back.items()[i].identity_id, s.experts[1].items()[i].identity_id);
        EXPECT_EQ(back.items()[i].embedding, s.experts[1].items()[i].embedding);
    }
    std::ostringstream again;
    write_expert_index(again, back);
    EXPECT_EQ(again.str(), os.str());
}

TEST(EmbeddingTable, Rejections) {
    const auto read = [](std::istream& is) { read_expert_index(is); };
    EXPECT_EQ(parse_error("MEAAD-EMB v2 dim=2 expert=0\n0\t0\t1,0\n", read), ErrorCode::UnsupportedVersion);
    EXPECT_EQ(parse_error("MEAAD-QRY v1 dim=2 experts=1\n", read), ErrorCode::Parse);
    EXPECT_EQ(parse_error("MEAAD-EMB v1 dim=2 expert=0\n0\t0\t1,0,0\n", read), ErrorCode::DimensionMismatch);
    EXPECT_EQ(parse_error("MEAAD-EMB v1 dim=2 expert=0\n0\t0\t1,1\n", read), ErrorCode::Parse);
    EXPECT_EQ(parse_error("", read), ErrorCode::Parse);
}

TEST(QueryFile, RoundTrip) {
    const Scenario s = tiny();
    auto queries = s.queries;
    queries[1].label = QueryLabel::Adversarial;
    std::ostringstream os;
    write_queries(os, queries, 6, 2);
    std::istringstream is(os.str());
    const QueryFile back = read_queries(is);
    EXPECT_EQ(back.dimension, 6u);
    EXPECT_EQ(back.n_experts, 2u);
    ASSERT_EQ(back.queries.size(), queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) {
        EXPECT_EQ(back.queries[i].query_id, queries[i].query_id);
        EXPECT_EQ(back.queries[i].identity_id, queries[i].identity_id);
        EXPECT_EQ(back.queries[i].label, queries[i].label);
        EXPECT_EQ(back.queries[i].embeddings, queries[i].embeddings);
    }
    const auto read = [](std::istream& in) { read_queries(in); };
    EXPECT_EQ(parse_error("MEAAD-QRY v9 dim=2 experts=1\n", read), ErrorCode::UnsupportedVersion);
    EXPECT_EQ(parse_error("MEAAD-QRY v1 dim=2 experts=2\n0\t0\tbenign\t1,0\n", read), ErrorCode::DimensionMismatch);
}

TEST(FeatureFile, RoundTrip) {
    FeatureDataset ds;
    ds.layout = {2, 2};
    ds.examples = {{4, std::vector<double>(ds.layout.dimension(), 0.125), 1},
                   {5, std::vector<double>(ds.layout.dimension(), 1.0 / 3.0), 0}};
    std::ostringstream os;
    write_feature_dataset(os, ds);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "MEAAD-FEAT v1 n=2 k=2 d=10");
    std::istringstream is(os.str());
    const FeatureDataset back = read_feature_dataset(is);
    EXPECT_EQ(back.layout.n_experts, 2u);
    ASSERT_EQ(back.examples.size(), 2u);
    EXPECT_EQ(back.examples[1].feature, ds.examples[1].feature);
    EXPECT_EQ(back.examples[0].label, 1);
    const auto read = [](std::istream& in) { read_feature_dataset(in); };
    EXPECT_EQ(parse_error("MEAAD-FEAT v1 n=2 k=2 d=9\n", read), ErrorCode::DimensionMismatch);
    EXPECT_EQ(parse_error("MEAAD-FEAT v0 n=2 k=2 d=10\n", read), ErrorCode::UnsupportedVersion);
}

TEST(ModelFile, RoundTripGivesBitwiseEqualOutputs) {
    std::mt19937_64 rng(13);
    DetectorModel m;
    const std::vector<std::size_t> hidden{7, 5};
    m.network = Mlp<DetectorReal>::glorot_uniform(10, hidden, rng);
    m.hyperparams.seed = 17;
    m.hyperparams.hidden = hidden;
    m.layout = {2, 2};
    m.blocks = FeatureBlocks{true, false, true};
    std::ostringstream os;
    write_detector(os, m);
    std::istringstream is(os.str());
    const DetectorModel back = read_detector(is);
    EXPECT_EQ(back.hyperparams.seed, 17u);
    EXPECT_EQ(back.hyperparams.hidden, hidden);
    EXPECT_EQ(back.blocks, m.blocks);
    EXPECT_EQ(back.layout.support_size, 2u);
    std::normal_distribution<double> g;
    for (int t = 0; t < 100; ++t) {
        std::vector<double> x(10);
        for (auto& v : x) v = g(rng);
        EXPECT_EQ(back.network.logit(x), m.network.logit(x));
    }
    std::string text = os.str();
    text.replace(text.find("v1"), 2, "v2");
    const auto read = [](std::istream& in) { read_detector(in); };
    EXPECT_EQ(parse_error(text, read), ErrorCode::UnsupportedVersion);
}

TEST(Csv, MetricsHeader) {
    std::ostringstream os;
    write_metrics_header(os);
    EXPECT_EQ(os.str(), "name,n,tp,fp,tn,fn,accuracy,precision,recall,f1,roc_auc\n");
}
