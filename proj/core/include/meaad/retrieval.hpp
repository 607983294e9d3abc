#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "meaad/embedding.hpp"

namespace meaad {

struct SupportEntry {
    std::size_t rank = 0;  // 1-based
    ItemId item_id = 0;
    IdentityId identity_id = 0;
    EmbeddingVector embedding;
    double similarity = 0.0;
};

/// Top-K retrieval of one expert for one query, ordered by
/// (similarity descending, item_id ascending).
struct SupportSet {
    ExpertId expert_id = 0;
    QueryId query_id = 0;
    std::vector<SupportEntry> entries;

    std::size_t size() const noexcept { return entries.size(); }
    std::vector<ItemId> item_ids() const;
};

/// Exact full-scan top-K cosine retrieval. Items whose id appears in
/// `exclude_ids` are never returned. Throws InsufficientGallery when fewer
/// than `k` items remain eligible.
SupportSet retrieve_top_k(const ExpertIndex& index, const EmbeddingVector& query, std::size_t k,
                          std::span<const ItemId> exclude_ids = {}, QueryId query_id = 0);

}  // namespace meaad
