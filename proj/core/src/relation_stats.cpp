#include "meaad/relation_stats.hpp"

#include <ostream>

#include "meaad/context_features.hpp"
#include "meaad/detector.hpp"
#include "meaad/formats.hpp"

namespace meaad {

namespace {

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

RelationStats relation_stats_for(const QuerySample& query, std::span<const SupportSet> supports) {
    const ContextFeature f = build_context_feature(query, supports);
    RelationStats r;
    r.query_id = query.query_id;
    r.label = query.label;
    r.qs_mean = mean(f.qs_block);
    r.ss_mean = mean(f.ss_block);
    if (supports.size() >= 2) r.common_count = voting_detect(supports, 0).common_count;
    return r;
}

std::vector<RelationStats> relation_stats(std::span<const QuerySample> queries,
                                          std::span<const ExpertIndex> indexes, std::size_t k) {
    std::vector<RelationStats> out;
    out.reserve(queries.size());
    for (const auto& q : queries) {
        const QueryContext ctx = extract_context(q, indexes, k);
        out.push_back(relation_stats_for(q, ctx.supports));
    }
    return out;
}

void write_relation_stats_csv(std::ostream& os, std::span<const RelationStats> rows) {
    os << "query_id,label,qs_mean,ss_mean,common_count\n";
    for (const auto& r : rows) {
        os << r.query_id << ',' << to_string(r.label) << ',' << format_real(r.qs_mean) << ','
           << format_real(r.ss_mean) << ',';
        if (r.common_count) os << *r.common_count;
        os << '\n';
    }
}

}  // namespace meaad
