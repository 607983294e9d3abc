#include "meaad/relation_stats.hpp"
#include "meaad/scenario.hpp"
#include "support.hpp"

using namespace meaad;
using testutil::error_code_of;

TEST(Scenario, ShapesAndIds) {
    ScenarioConfig c;
    c.n_identities = 5;
    c.items_per_identity = 4;
    c.n_experts = 3;
    c.dimension = 16;
    c.queries_per_identity = 2;
    c.eval_queries_per_identity = 1;
    const Scenario s = generate_scenario(c);
    ASSERT_EQ(s.experts.size(), 3u);
    for (const auto& e : s.experts) {
        EXPECT_EQ(e.size(), 20u);
        EXPECT_EQ(e.dimension(), 16u);
    }
    EXPECT_EQ(s.experts[1].items()[6].item_id, 6u);
    EXPECT_EQ(s.experts[1].items()[6].identity_id, 1u);
    ASSERT_EQ(s.queries.size(), 10u);
    ASSERT_EQ(s.eval_queries.size(), 5u);
    EXPECT_EQ(s.eval_queries.front().query_id, 10u);
    for (const auto& q : s.queries) {
        EXPECT_EQ(q.label, QueryLabel::Benign);
        EXPECT_EQ(q.embeddings.size(), 3u);
    }
}

TEST(Scenario, DeterministicInSeed) {
    ScenarioConfig c;
    c.n_identities = 6;
    c.dimension = 12;
    c.queries_per_identity = 3;
    const Scenario a = generate_scenario(c);
    const Scenario b = generate_scenario(c);
    for (std::size_t e = 0; e < a.experts.size(); ++e) {
        for (std::size_t i = 0; i < a.experts[e].size(); ++i) {
            EXPECT_EQ(a.experts[e].items()[i].embedding, b.experts[e].items()[i].embedding);
        }
    }
    c.seed = 8;
    EXPECT_NE(generate_scenario(c).experts[0].items()[0].embedding, a.experts[0].items()[0].embedding);
}

TEST(Scenario, DegenerateClusters) {
    ScenarioConfig c;
    c.n_identities = 8;
    c.items_per_identity = 16;
    c.dimension = 20;
    c.cluster_noise = 0.0;
    c.cross_expert_jitter = 0.0;
    c.queries_per_identity = 2;
    const Scenario s = generate_scenario(c);
    for (IdentityId id = 0; id < 8; ++id) {
        const auto& first = s.experts[0].items()[id * 16].embedding;
        for (const auto& e : s.experts) {
            for (std::size_t pos : e.positions_of_identity(id)) EXPECT_EQ(e.items()[pos].embedding, first);
        }
    }
    for (const auto& q : s.queries) {
        const auto ctx = extract_context(q, s.experts, 15);
        for (const auto& sup : ctx.supports) {
            for (const auto& entry : sup.entries) EXPECT_EQ(entry.identity_id, q.identity_id);
        }
        const auto stats = relation_stats_for(q, ctx.supports);
        EXPECT_NEAR(stats.qs_mean, 1.0, 1e-12);
        EXPECT_NEAR(stats.ss_mean, 1.0, 1e-12);
        EXPECT_EQ(stats.common_count, 15u);
    }
}

TEST(Scenario, Validation) {
    ScenarioConfig c;
    c.cluster_noise = -1.0;
    EXPECT_EQ(error_code_of([&] { generate_scenario(c); }), ErrorCode::InvalidConfig);
    c = ScenarioConfig{};
    c.n_experts = 0;
    EXPECT_EQ(error_code_of([&] { generate_scenario(c); }), ErrorCode::InvalidConfig);
    c = ScenarioConfig{};
    c.dimension = 1;
    EXPECT_EQ(error_code_of([&] { generate_scenario(c); }), ErrorCode::InvalidConfig);
}

TEST(RelationStats, HandCases) {
    const auto q = testutil::emb({1, 0});
    QuerySample query;
    query.embeddings = {q, q};
    const std::vector<SupportSet> same{testutil::make_support(0, {1, 2, 3}, {q, q, q}),
                                       testutil::make_support(1, {1, 2, 3}, {q, q, q})};
    const auto r = relation_stats_for(query, same);
    EXPECT_EQ(r.qs_mean, 1.0);
    EXPECT_EQ(r.ss_mean, 1.0);
    EXPECT_EQ(r.common_count, 3u);
    const std::vector<SupportSet> apart{testutil::make_support(0, {1, 2, 3}, {q, q, q}),
                                        testutil::make_support(1, {4, 5, 6}, {q, q, q})};
    EXPECT_EQ(relation_stats_for(query, apart).common_count, 0u);
    QuerySample single;
    single.embeddings = {q};
    EXPECT_FALSE(relation_stats_for(single, std::span(same).first(1)).common_count.has_value());
}

TEST(RelationStats, CsvHeader) {
    std::ostringstream os;
    const std::vector<RelationStats> rows{{3, QueryLabel::Benign, 0.5, 0.25, std::nullopt}};
    write_relation_stats_csv(os, rows);
    EXPECT_EQ(os.str(), "query_id,label,qs_mean,ss_mean,common_count\n3,benign,0.5,0.25,\n");
}
