#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "meaad/embedding.hpp"
#include "meaad/retrieval.hpp"

namespace meaad {

/// Per-query scalar summaries of the three context relations.
struct RelationStats {
    QueryId query_id = 0;
    QueryLabel label = QueryLabel::Unknown;
    double qs_mean = 0.0;  // mean query-support cosine over all experts and ranks
    double ss_mean = 0.0;  // mean support-support cosine (i < j) over all experts
    std::optional<std::size_t> common_count;  // |intersection of support ids|, N >= 2 only
};

RelationStats relation_stats_for(const QuerySample& query, std::span<const SupportSet> supports);

std::vector<RelationStats> relation_stats(std::span<const QuerySample> queries,
                                          std::span<const ExpertIndex> indexes, std::size_t k);

/// CSV with header `query_id,label,qs_mean,ss_mean,common_count`; an absent
/// common count is written as an empty field.
void write_relation_stats_csv(std::ostream& os, std::span<const RelationStats> rows);

}  // namespace meaad
