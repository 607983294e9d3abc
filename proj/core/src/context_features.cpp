#include "meaad/context_features.hpp"

#include <algorithm>
#include <string>

#include "meaad/error.hpp"

namespace meaad {

FeatureBlocks FeatureBlocks::parse(std::string_view text) {
    if (text == "all") return {};
    FeatureBlocks out{false, false, false};
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = std::min(text.find(',', start), text.size());
        const std::string_view token = text.substr(start, comma - start);
        if (token == "qs") {
            out.query_support = true;
        } else if (token == "ss") {
            out.support_support = true;
        } else if (token == "ce") {
            out.cross_expert = true;
        } else {
            throw Error(ErrorCode::InvalidConfig, "unknown feature block '" + std::string(token) + "'");
        }
        start = comma + 1;
    }
    return out;
}

std::string FeatureBlocks::to_string() const {
    std::string out;
    const auto add = [&out](bool on, const char* name) {
        if (!on) return;
        if (!out.empty()) out += ',';
        out += name;
    };
    add(query_support, "qs");
    add(support_support, "ss");
    add(cross_expert, "ce");
    return out;
}

std::size_t FeatureLayout::dimension(const FeatureBlocks& blocks) const noexcept {
    return (blocks.query_support ? qs_size() : 0) + (blocks.support_support ? ss_size() : 0) +
           (blocks.cross_expert ? ce_size() : 0);
}

std::vector<double> ContextFeature::flat() const {
    std::vector<double> out;
    out.reserve(qs_block.size() + ss_block.size() + ce_block.size());
    out.insert(out.end(), qs_block.begin(), qs_block.end());
    out.insert(out.end(), ss_block.begin(), ss_block.end());
    out.insert(out.end(), ce_block.begin(), ce_block.end());
    return out;
}

std::vector<double> query_support_affinity(const EmbeddingVector& query_embedding,
                                           const SupportSet& support) {
    std::vector<double> out;
    out.reserve(support.size());
    for (const auto& entry : support.entries) {
        out.push_back(cosine_similarity(query_embedding, entry.embedding));
    }
    return out;
}

std::vector<double> support_support_affinity(const SupportSet& support) {
    const std::size_t k = support.size();
    std::vector<double> out;
    out.reserve(k * (k - (k > 0 ? 1 : 0)) / 2);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            out.push_back(cosine_similarity(support.entries[i].embedding, support.entries[j].embedding));
        }
    }
    return out;
}

std::vector<double> cross_expert_affinity(std::span<const SupportSet> supports) {
    const std::size_t n = supports.size();
    if (n < 2) throw Error(ErrorCode::SingleExpert, "cross-expert affinity needs at least 2 experts");
    const std::size_t k = supports.front().size();
    std::vector<std::vector<ItemId>> sorted_ids;
    sorted_ids.reserve(n);
    for (const auto& s : supports) {
        if (s.size() != k) {
            throw Error(ErrorCode::MismatchedSupportSizes,
                        "support sizes " + std::to_string(s.size()) + " and " + std::to_string(k));
        }
        auto ids = s.item_ids();
        std::sort(ids.begin(), ids.end());
        sorted_ids.push_back(std::move(ids));
    }

    const double denom = static_cast<double>(n - 1);
    std::vector<double> out;
    out.reserve(n * k);
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& entry : supports[i].entries) {
            std::size_t hits = 0;
            for (std::size_t l = 0; l < n; ++l) {
                if (l == i) continue;
                if (std::binary_search(sorted_ids[l].begin(), sorted_ids[l].end(), entry.item_id)) ++hits;
            }
            out.push_back(static_cast<double>(hits) / denom);
        }
    }
    return out;
}

ContextFeature build_context_feature(const QuerySample& query, std::span<const SupportSet> supports) {
    const std::size_t n = supports.size();
    if (n == 0) throw Error(ErrorCode::Empty, "no support sets");
    if (query.embeddings.size() != n) {
        throw Error(ErrorCode::DimensionMismatch, "query has " + std::to_string(query.embeddings.size()) +
                                                      " channels for " + std::to_string(n) + " experts");
    }
    const std::size_t k = supports.front().size();
    ContextFeature f;
    f.n_experts = n;
    f.support_size = k;
    f.qs_block.reserve(n * k);
    f.ss_block.reserve(n * k * (k - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        if (supports[i].size() != k) {
            throw Error(ErrorCode::MismatchedSupportSizes, "support sets differ in size");
        }
        const auto qs = query_support_affinity(query.embeddings[i], supports[i]);
        f.qs_block.insert(f.qs_block.end(), qs.begin(), qs.end());
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto ss = support_support_affinity(supports[i]);
        f.ss_block.insert(f.ss_block.end(), ss.begin(), ss.end());
    }
    if (n >= 2) f.ce_block = cross_expert_affinity(supports);
    return f;
}

QueryContext extract_context(const QuerySample& query, std::span<const ExpertIndex> indexes,
                             std::size_t k, std::span<const ItemId> exclude_ids) {
    if (indexes.empty()) throw Error(ErrorCode::InvalidConfig, "at least one expert is required");
    validate_query(query, indexes);
    QueryContext ctx;
    ctx.supports.reserve(indexes.size());
    for (std::size_t i = 0; i < indexes.size(); ++i) {
        ctx.supports.push_back(
            retrieve_top_k(indexes[i], query.embeddings[i], k, exclude_ids, query.query_id));
    }
    ctx.feature = build_context_feature(query, ctx.supports);
    return ctx;
}

ContextFeature assemble_context_feature(const QuerySample& query,
                                        std::span<const ExpertIndex> indexes, std::size_t k,
                                        std::span<const ItemId> exclude_ids) {
    return extract_context(query, indexes, k, exclude_ids).feature;
}

std::vector<double> select_blocks(std::span<const double> flat, const FeatureLayout& layout,
                                  const FeatureBlocks& blocks) {
    if (flat.size() != layout.dimension()) {
        throw Error(ErrorCode::DimensionMismatch, "feature length " + std::to_string(flat.size()) +
                                                      " does not match layout d=" +
                                                      std::to_string(layout.dimension()));
    }
    std::vector<double> out;
    out.reserve(layout.dimension(blocks));
    const auto take = [&](bool on, std::size_t offset, std::size_t size) {
        if (on) out.insert(out.end(), flat.begin() + offset, flat.begin() + offset + size);
    };
    take(blocks.query_support, layout.qs_offset(), layout.qs_size());
    take(blocks.support_support, layout.ss_offset(), layout.ss_size());
    take(blocks.cross_expert, layout.ce_offset(), layout.ce_size());
    return out;
}

std::vector<SupportSet> restrict_supports(std::span<const SupportSet> supports,
                                          std::span<const std::size_t> experts, std::size_t k) {
    std::vector<SupportSet> out;
    out.reserve(experts.size());
    for (std::size_t e : experts) {
        if (e >= supports.size()) throw Error(ErrorCode::InvalidConfig, "expert position out of range");
        const SupportSet& s = supports[e];
        if (k == 0 || k > s.size()) {
            throw Error(ErrorCode::InvalidConfig, "cannot cut support set of size " +
                                                      std::to_string(s.size()) + " to K=" + std::to_string(k));
        }
        SupportSet cut{s.expert_id, s.query_id, {}};
        cut.entries.assign(s.entries.begin(), s.entries.begin() + static_cast<std::ptrdiff_t>(k));
        out.push_back(std::move(cut));
    }
    return out;
}

QuerySample restrict_query(const QuerySample& query, std::span<const std::size_t> experts) {
    QuerySample out{query.query_id, query.identity_id, {}, query.label};
    for (std::size_t e : experts) {
        if (e >= query.embeddings.size()) throw Error(ErrorCode::InvalidConfig, "expert position out of range");
        out.embeddings.push_back(query.embeddings[e]);
    }
    return out;
}

}  // namespace meaad
