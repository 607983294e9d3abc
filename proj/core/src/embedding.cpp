#include "meaad/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "meaad/error.hpp"

namespace meaad {

namespace {

constexpr double kZeroNorm = 1e-12;

void require_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, "embedding contains NaN or Inf");
    }
}

void require_dimension(std::size_t d) {
    if (d < 2) {
        throw Error(ErrorCode::DimensionMismatch,
                    "embedding dimension must be >= 2, got " + std::to_string(d));
    }
}

double l2_norm(std::span<const double> v) noexcept { return std::sqrt(dot(v, v)); }

}  // namespace

EmbeddingVector EmbeddingVector::from_unit(std::vector<double> values) {
    require_dimension(values.size());
    require_finite(values);
    const double norm = l2_norm(values);
    if (std::abs(norm - 1.0) > kUnitTolerance) {
        throw Error(ErrorCode::Parse, "embedding is not unit norm (norm " + std::to_string(norm) + ")");
    }
    return EmbeddingVector(std::move(values));
}

EmbeddingVector normalize(std::span<const double> v) {
    require_dimension(v.size());
    require_finite(v);
    const double norm = l2_norm(v);
    if (norm < kZeroNorm) throw Error(ErrorCode::ZeroVector, "cannot normalize a zero vector");
    std::vector<double> out(v.begin(), v.end());
    for (double& x : out) x /= norm;
    return EmbeddingVector(std::move(out));
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
    // Four independent accumulators, always combined in the same order.
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    const std::size_t n = a.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dimension() != b.dimension()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "cosine_similarity: " + std::to_string(a.dimension()) + " vs " +
                        std::to_string(b.dimension()));
    }
    return std::clamp(dot(a.values(), b.values()), -1.0, 1.0);
}

ExpertIndex::ExpertIndex(ExpertId expert_id, std::vector<GalleryItem> items)
    : expert_id_(expert_id), dimension_(0), items_(std::move(items)) {
    if (items_.empty()) throw Error(ErrorCode::Empty, "expert index has no gallery items");
    dimension_ = items_.front().embedding.dimension();
    position_.reserve(items_.size());
    for (std::size_t i = 0; i < items_.size(); ++i) {
        const GalleryItem& item = items_[i];
        if (item.embedding.dimension() != dimension_) {
            throw Error(ErrorCode::DimensionMismatch,
                        "gallery item " + std::to_string(item.item_id) + " has dimension " +
                            std::to_string(item.embedding.dimension()) + ", expected " +
                            std::to_string(dimension_));
        }
        if (!position_.emplace(item.item_id, i).second) {
            throw Error(ErrorCode::Parse, "duplicate item_id " + std::to_string(item.item_id));
        }
    }
}

const GalleryItem* ExpertIndex::find(ItemId id) const noexcept {
    const auto it = position_.find(id);
    return it == position_.end() ? nullptr : &items_[it->second];
}

std::vector<std::size_t> ExpertIndex::positions_of_identity(IdentityId identity) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < items_.size(); ++i) {
        if (items_[i].identity_id == identity) out.push_back(i);
    }
    return out;
}

std::string_view to_string(QueryLabel label) noexcept {
    switch (label) {
        case QueryLabel::Benign: return "benign";
        case QueryLabel::Adversarial: return "adversarial";
        case QueryLabel::Unknown: return "unknown";
    }
    return "unknown";
}

QueryLabel parse_query_label(std::string_view text) {
    if (text == "benign") return QueryLabel::Benign;
    if (text == "adversarial") return QueryLabel::Adversarial;
    if (text == "unknown") return QueryLabel::Unknown;
    throw Error(ErrorCode::Parse, "unknown query label '" + std::string(text) + "'");
}

void validate_query(const QuerySample& query, std::span<const ExpertIndex> indexes) {
    if (query.embeddings.size() != indexes.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "query " + std::to_string(query.query_id) + " has " +
                        std::to_string(query.embeddings.size()) + " expert embeddings, expected " +
                        std::to_string(indexes.size()));
    }
    for (std::size_t i = 0; i < indexes.size(); ++i) {
        if (query.embeddings[i].dimension() != indexes[i].dimension()) {
            throw Error(ErrorCode::DimensionMismatch,
                        "query " + std::to_string(query.query_id) + " expert " + std::to_string(i) +
                            " dimension mismatch");
        }
    }
}

}  // namespace meaad
