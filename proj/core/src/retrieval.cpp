#include "meaad/retrieval.hpp"

#include <algorithm>
#include <string>

#include "meaad/error.hpp"

namespace meaad {

std::vector<ItemId> SupportSet::item_ids() const {
    std::vector<ItemId> ids;
    ids.reserve(entries.size());
    for (const auto& e : entries) ids.push_back(e.item_id);
    return ids;
}

SupportSet retrieve_top_k(const ExpertIndex& index, const EmbeddingVector& query, std::size_t k,
                          std::span<const ItemId> exclude_ids, QueryId query_id) {
    if (k == 0) throw Error(ErrorCode::InvalidConfig, "support size K must be positive");
    if (query.dimension() != index.dimension()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "query dimension " + std::to_string(query.dimension()) + " vs gallery " +
                        std::to_string(index.dimension()));
    }

    struct Candidate {
        double similarity;
        ItemId id;
        std::size_t position;
    };
    const auto items = index.items();
    std::vector<Candidate> candidates;
    candidates.reserve(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        const ItemId id = items[i].item_id;
        if (std::find(exclude_ids.begin(), exclude_ids.end(), id) != exclude_ids.end()) continue;
        candidates.push_back({cosine_similarity(query, items[i].embedding), id, i});
    }
    if (candidates.size() < k) {
        throw Error(ErrorCode::InsufficientGallery,
                    "expert " + std::to_string(index.expert_id()) + " has " +
                        std::to_string(candidates.size()) + " eligible items, K=" + std::to_string(k));
    }

    const auto before = [](const Candidate& a, const Candidate& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.id < b.id;
    };
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                      candidates.end(), before);

    SupportSet out;
    out.expert_id = index.expert_id();
    out.query_id = query_id;
    out.entries.reserve(k);
    for (std::size_t r = 0; r < k; ++r) {
        const GalleryItem& item = items[candidates[r].position];
        out.entries.push_back(
            {r + 1, item.item_id, item.identity_id, item.embedding, candidates[r].similarity});
    }
    return out;
}

}  // namespace meaad
