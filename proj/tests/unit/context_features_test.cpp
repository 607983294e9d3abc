#include "support.hpp"

using namespace meaad;
using testutil::emb;
using testutil::error_code_of;
using testutil::make_support;

TEST(QuerySupport, SelfSimilarityIsOne) {
    const auto q = emb({0.3, 0.4, 0.5});
    const auto s = make_support(0, {1, 2, 3}, {q, q, q});
    for (double v : query_support_affinity(q, s)) EXPECT_NEAR(v, 1.0, 1e-15);
}

TEST(QuerySupport, HandCase) {
    const auto s = make_support(0, {1, 2}, {emb({1, 0}), emb({0, 1})});
    EXPECT_EQ(query_support_affinity(emb({1, 0}), s), (std::vector<double>{1.0, 0.0}));
}

TEST(QuerySupport, MatchesNaiveDots) {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 50; ++t) {
        const auto q = testutil::random_emb(rng, 4);
        std::vector<EmbeddingVector> e;
        for (int j = 0; j < 3; ++j) e.push_back(testutil::random_emb(rng, 4));
        const auto got = query_support_affinity(q, make_support(0, {1, 2, 3}, e));
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(got[j], oracle::plain_dot(testutil::as_vec(q), testutil::as_vec(e[j])), 1e-12);
    }
}

TEST(SupportSupport, IdenticalSupports) {
    const auto a = emb({1, 2});
    EXPECT_EQ(support_support_affinity(make_support(0, {1, 2, 3}, {a, a, a})).size(), 3u);
    for (double v : support_support_affinity(make_support(0, {1, 2, 3}, {a, a, a}))) EXPECT_NEAR(v, 1.0, 1e-15);
}

TEST(SupportSupport, SingleSupportHasNoPairs) {
    EXPECT_TRUE(support_support_affinity(make_support(0, {4}, {emb({1, 0})})).empty());
}

TEST(SupportSupport, UpperTriangleOrder) {
    std::mt19937_64 rng(2);
    std::vector<EmbeddingVector> e;
    for (int j = 0; j < 4; ++j) e.push_back(testutil::random_emb(rng, 5));
    const auto got = support_support_affinity(make_support(0, {1, 2, 3, 4}, e));
    ASSERT_EQ(got.size(), 6u);
    std::size_t p = 0;
    for (int a = 0; a < 4; ++a) {
        for (int b = a + 1; b < 4; ++b) {
            EXPECT_NEAR(got[p++], oracle::plain_dot(testutil::as_vec(e[a]), testutil::as_vec(e[b])), 1e-12);
        }
    }
}

TEST(CrossExpert, IdenticalAndDisjoint) {
    const std::vector<SupportSet> same{make_support(0, {1, 2, 3}), make_support(1, {3, 1, 2})};
    for (double v : cross_expert_affinity(same)) EXPECT_EQ(v, 1.0);
    const std::vector<SupportSet> apart{make_support(0, {1, 2, 3}), make_support(1, {4, 5, 6})};
    for (double v : cross_expert_affinity(apart)) EXPECT_EQ(v, 0.0);
}

TEST(CrossExpert, HalfPresence) {
    const std::vector<SupportSet> s{make_support(0, {1, 2}), make_support(1, {1, 7}), make_support(2, {8, 9})};
    const auto a = cross_expert_affinity(s);
    ASSERT_EQ(a.size(), 6u);
    EXPECT_EQ(a[0], 0.5);  // item 1 of expert 0 appears in expert 1 only
    EXPECT_EQ(a[1], 0.0);
    EXPECT_EQ(a[2], 0.5);
    EXPECT_EQ(a[4], 0.0);
}

TEST(CrossExpert, Errors) {
    const std::vector<SupportSet> one{make_support(0, {1, 2})};
    EXPECT_EQ(error_code_of([&] { cross_expert_affinity(one); }), ErrorCode::SingleExpert);
    const std::vector<SupportSet> ragged{make_support(0, {1, 2}), make_support(1, {1})};
    EXPECT_EQ(error_code_of([&] { cross_expert_affinity(ragged); }), ErrorCode::MismatchedSupportSizes);
}

TEST(Layout, DimensionLaw) {
    EXPECT_EQ((FeatureLayout{3, 4}.dimension()), 42u);
    EXPECT_EQ((FeatureLayout{4, 15}.dimension()), 540u);
    EXPECT_EQ((FeatureLayout{1, 15}.dimension()), 120u);
    EXPECT_EQ((FeatureLayout{4, 1}.dimension()), 8u);
    EXPECT_EQ((FeatureLayout{1, 1}.dimension()), 1u);
    for (std::size_t n = 2; n <= 6; ++n) {
        for (std::size_t k = 1; k <= 30; ++k) {
            EXPECT_EQ((FeatureLayout{n, k}.dimension()), 2 * n * k + n * k * (k - 1) / 2);
        }
    }
}

TEST(Layout, BlockSelection) {
    const FeatureLayout l{3, 4};
    EXPECT_EQ(l.dimension(FeatureBlocks{true, false, false}), 12u);
    EXPECT_EQ(l.dimension(FeatureBlocks{false, true, false}), 18u);
    EXPECT_EQ(l.dimension(FeatureBlocks{false, false, true}), 12u);
    std::vector<double> flat(42);
    for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = static_cast<double>(i);
    const auto ce = select_blocks(flat, l, FeatureBlocks{false, false, true});
    EXPECT_EQ(ce.front(), 30.0);
    EXPECT_EQ(ce.back(), 41.0);
    const auto qs_ce = select_blocks(flat, l, FeatureBlocks{true, false, true});
    ASSERT_EQ(qs_ce.size(), 24u);
    EXPECT_EQ(qs_ce[11], 11.0);
    EXPECT_EQ(qs_ce[12], 30.0);
}

TEST(Blocks, ParseAndPrint) {
    EXPECT_EQ(FeatureBlocks::parse("all"), (FeatureBlocks{true, true, true}));
    EXPECT_EQ(FeatureBlocks::parse("ce,qs"), (FeatureBlocks{true, false, true}));
    EXPECT_EQ(FeatureBlocks::parse(FeatureBlocks{false, true, false}.to_string()), (FeatureBlocks{false, true, false}));
    EXPECT_EQ(error_code_of([] { FeatureBlocks::parse("xy"); }), ErrorCode::InvalidConfig);
}

TEST(Assemble, MatchesOracleOnRandomGalleries) {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 40; ++t) {
        const std::size_t n = 1 + t % 4, k = 1 + t % 6, d = 2 + t % 7;
        std::vector<ExpertIndex> indexes;
        std::vector<std::vector<oracle::Item>> ref(n);
        for (std::size_t e = 0; e < n; ++e) {
            std::vector<GalleryItem> items;
            for (ItemId id = 0; id < 12; ++id) {
                const auto v = oracle::random_unit(rng, d);
                items.push_back({id, 0, EmbeddingVector::from_unit(v)});
                ref[e].push_back({id, v});
            }
            indexes.emplace_back(static_cast<ExpertId>(e), items);
        }
        QuerySample q;
        std::vector<oracle::ExpertView> views;
        for (std::size_t e = 0; e < n; ++e) {
            const auto v = oracle::random_unit(rng, d);
            q.embeddings.push_back(EmbeddingVector::from_unit(v));
            oracle::ExpertView view{v, oracle::full_sort_top_k(ref[e], v, k), {}};
            for (auto id : view.ids) view.supports.push_back(ref[e][id].embedding);
            views.push_back(view);
        }
        const auto got = assemble_context_feature(q, indexes, k).flat();
        const auto want = oracle::context_feature(views);
        ASSERT_EQ(got.size(), want.size());
        ASSERT_EQ(got.size(), (FeatureLayout{n, k}.dimension()));
        for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
    }
}

TEST(Restrict, EqualsDirectRetrieval) {
    std::mt19937_64 rng(8);
    std::vector<ExpertIndex> indexes;
    for (ExpertId e = 0; e < 3; ++e) {
        std::vector<GalleryItem> items;
        for (ItemId id = 0; id < 40; ++id) items.push_back({id, 0, testutil::random_emb(rng, 6)});
        indexes.emplace_back(e, items);
    }
    QuerySample q;
    for (int e = 0; e < 3; ++e) q.embeddings.push_back(testutil::random_emb(rng, 6));
    const auto full = extract_context(q, indexes, 12).supports;
    const std::vector<std::size_t> keep{0, 2};
    const auto cut = restrict_supports(full, keep, 5);
    const std::vector<ExpertIndex> sub{indexes[0], indexes[2]};
    const auto direct = assemble_context_feature(restrict_query(q, keep), sub, 5).flat();
    EXPECT_EQ(build_context_feature(restrict_query(q, keep), cut).flat(), direct);
}
