#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace meaad {

using ItemId = std::uint64_t;
using IdentityId = std::uint32_t;
using QueryId = std::uint64_t;
using ExpertId = std::uint32_t;

/// Unit-norm embedding of fixed dimension (D >= 2, all entries finite).
///
/// Instances can only be obtained through normalize() or from_unit(), so every
/// EmbeddingVector in the system satisfies the unit-norm invariant and all
/// downstream similarity is a plain dot product.
class EmbeddingVector {
public:
    static constexpr double kUnitTolerance = 1e-9;

    /// Adopts values that are already unit norm (e.g. parsed from a file)
    /// without re-normalizing, so round trips stay bit-exact.
    static EmbeddingVector from_unit(std::vector<double> values);

    std::size_t dimension() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

private:
    friend EmbeddingVector normalize(std::span<const double> v);
    explicit EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {}

    std::vector<double> values_;
};

/// v / ||v||_2. Throws ZeroVector when ||v|| < 1e-12 and NonFinite on NaN/Inf.
EmbeddingVector normalize(std::span<const double> v);

/// Plain dot product with a fixed summation order. Lengths must match.
double dot(std::span<const double> a, std::span<const double> b) noexcept;

/// Cosine similarity of two unit vectors, clamped to [-1, 1].
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

struct GalleryItem {
    ItemId item_id = 0;
    IdentityId identity_id = 0;
    EmbeddingVector embedding;
};

/// One expert's gallery. Immutable after construction.
class ExpertIndex {
public:
    ExpertIndex(ExpertId expert_id, std::vector<GalleryItem> items);

    ExpertId expert_id() const noexcept { return expert_id_; }
    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t size() const noexcept { return items_.size(); }
    std::span<const GalleryItem> items() const noexcept { return items_; }

    bool contains(ItemId id) const noexcept { return position_.contains(id); }
    const GalleryItem* find(ItemId id) const noexcept;

    /// Gallery positions of all items carrying `identity`, in storage order.
    std::vector<std::size_t> positions_of_identity(IdentityId identity) const;

private:
    ExpertId expert_id_;
    std::size_t dimension_;
    std::vector<GalleryItem> items_;
    std::unordered_map<ItemId, std::size_t> position_;
};

enum class QueryLabel { Benign, Adversarial, Unknown };

std::string_view to_string(QueryLabel label) noexcept;
QueryLabel parse_query_label(std::string_view text);

/// A probe carrying one embedding per expert channel.
struct QuerySample {
    QueryId query_id = 0;
    IdentityId identity_id = 0;
    std::vector<EmbeddingVector> embeddings;  // indexed by expert position
    QueryLabel label = QueryLabel::Unknown;
};

/// Checks that `query` has one embedding per index and that dimensions agree.
void validate_query(const QuerySample& query, std::span<const ExpertIndex> indexes);

}  // namespace meaad
