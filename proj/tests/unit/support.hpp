#pragma once

#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "meaad/context_features.hpp"
#include "meaad/embedding.hpp"
#include "meaad/error.hpp"
#include "meaad/retrieval.hpp"
#include "oracles/oracles.hpp"

namespace testutil {

inline meaad::EmbeddingVector emb(std::vector<double> v) { return meaad::normalize(v); }

inline meaad::EmbeddingVector random_emb(std::mt19937_64& rng, std::size_t d) {
    return meaad::EmbeddingVector::from_unit(oracle::random_unit(rng, d));
}

inline std::vector<double> as_vec(const meaad::EmbeddingVector& e) { return {e.values().begin(), e.values().end()}; }

/// A support set built by hand, ranks 1..K in the given order.
inline meaad::SupportSet make_support(meaad::ExpertId expert, const std::vector<meaad::ItemId>& ids,
                                      const std::vector<meaad::EmbeddingVector>& embeddings) {
    meaad::SupportSet s;
    s.expert_id = expert;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        s.entries.push_back({i + 1, ids[i], 0, embeddings[i], 0.0});
    }
    return s;
}

inline meaad::SupportSet make_support(meaad::ExpertId expert, const std::vector<meaad::ItemId>& ids) {
    std::vector<meaad::EmbeddingVector> e(ids.size(), emb({1.0, 0.0}));
    return make_support(expert, ids, e);
}

template <typename Fn>
meaad::ErrorCode error_code_of(Fn&& fn) {
    try {
        fn();
    } catch (const meaad::Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected meaad::Error";
    return meaad::ErrorCode::InvalidConfig;
}

}  // namespace testutil
