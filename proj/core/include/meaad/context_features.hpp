#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "meaad/embedding.hpp"
#include "meaad/retrieval.hpp"

namespace meaad {

/// Which affinity blocks participate in a feature vector.
struct FeatureBlocks {
    bool query_support = true;
    bool support_support = true;
    bool cross_expert = true;

    /// Parses a comma list drawn from {qs, ss, ce}, or "all".
    static FeatureBlocks parse(std::string_view text);
    std::string to_string() const;
    bool any() const noexcept { return query_support || support_support || cross_expert; }

    friend bool operator==(const FeatureBlocks&, const FeatureBlocks&) = default;
};

/// Sizes and offsets of the flat feature for a given (N, K).
///
/// Layout: all query-support blocks (expert 0..N-1), then all support-support
/// blocks, then the cross-expert rows. Structurally absent blocks (no
/// support-support block at K = 1, no cross-expert block at N = 1) take no space.
struct FeatureLayout {
    std::size_t n_experts = 0;
    std::size_t support_size = 0;

    std::size_t pairs() const noexcept { return support_size * (support_size - 1) / 2; }
    std::size_t qs_size() const noexcept { return n_experts * support_size; }
    std::size_t ss_size() const noexcept { return n_experts * pairs(); }
    std::size_t ce_size() const noexcept { return n_experts >= 2 ? n_experts * support_size : 0; }
    std::size_t dimension() const noexcept { return qs_size() + ss_size() + ce_size(); }

    std::size_t qs_offset() const noexcept { return 0; }
    std::size_t ss_offset() const noexcept { return qs_size(); }
    std::size_t ce_offset() const noexcept { return qs_size() + ss_size(); }

    /// Length of the vector after keeping only `blocks`.
    std::size_t dimension(const FeatureBlocks& blocks) const noexcept;
};

struct ContextFeature {
    std::size_t n_experts = 0;
    std::size_t support_size = 0;
    std::vector<double> qs_block;  // N*K
    std::vector<double> ss_block;  // N*K(K-1)/2
    std::vector<double> ce_block;  // N*K row-major, empty when N = 1

    FeatureLayout layout() const noexcept { return {n_experts, support_size}; }
    std::vector<double> flat() const;
};

/// Cosine similarity of the query to every support sample, in rank order.
std::vector<double> query_support_affinity(const EmbeddingVector& query_embedding,
                                           const SupportSet& support);

/// Strict upper triangle (row-major, i < j) of the support cosine matrix.
std::vector<double> support_support_affinity(const SupportSet& support);

/// Row-major N x K matrix: entry (i, j) is the fraction of the other N-1
/// experts whose support set contains the j-th sample of expert i.
std::vector<double> cross_expert_affinity(std::span<const SupportSet> supports);

/// Features from support sets that were already retrieved, one per expert.
ContextFeature build_context_feature(const QuerySample& query, std::span<const SupportSet> supports);

struct QueryContext {
    std::vector<SupportSet> supports;
    ContextFeature feature;
};

/// Retrieves the top-K support set from every expert and assembles the features.
QueryContext extract_context(const QuerySample& query, std::span<const ExpertIndex> indexes,
                             std::size_t k, std::span<const ItemId> exclude_ids = {});

ContextFeature assemble_context_feature(const QuerySample& query,
                                        std::span<const ExpertIndex> indexes, std::size_t k,
                                        std::span<const ItemId> exclude_ids = {});

/// Keeps only the requested blocks of a flat feature laid out per `layout`.
std::vector<double> select_blocks(std::span<const double> flat, const FeatureLayout& layout,
                                  const FeatureBlocks& blocks);

/// The support sets of the experts at the given positions, each cut to its
/// first `k` entries. Top-K retrieval is prefix-monotone in K, so this equals
/// retrieving with K = k from only those experts.
std::vector<SupportSet> restrict_supports(std::span<const SupportSet> supports,
                                          std::span<const std::size_t> experts, std::size_t k);

/// The query reduced to the expert channels at the given positions.
QuerySample restrict_query(const QuerySample& query, std::span<const std::size_t> experts);

}  // namespace meaad
