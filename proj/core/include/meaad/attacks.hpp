#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "meaad/detector.hpp"
#include "meaad/embedding.hpp"
#include "meaad/retrieval.hpp"

namespace meaad {

enum class AttackKind { Naive, Adaptive, Targeted };

std::string_view to_string(AttackKind kind) noexcept;
AttackKind parse_attack_kind(std::string_view text);

struct AttackConfig {
    AttackKind kind = AttackKind::Naive;
    double epsilon = 0.8;          // chord-length budget per expert channel
    std::size_t steps = 50;
    double step_size = 0.05;       // geodesic angle per step, radians
    double affinity_weight = 1.0;  // weight of the context-affinity term (adaptive)
    std::optional<IdentityId> target_identity;
    std::size_t support_size = 15;      // K used for retrieval inside the loop
    std::size_t refresh_interval = 5;   // re-retrieve support sets every R steps
    std::uint64_t seed = 0;

    void validate() const;
};

/// Euclidean (chord) distance between two unit vectors.
double chord_distance(const EmbeddingVector& a, const EmbeddingVector& b) noexcept;

/// Walks from `from` along the great circle toward `direction` until the
/// chord distance reaches `distance` or `direction` itself is reached.
/// When `direction` is antipodal the circle is chosen deterministically.
EmbeddingVector move_toward(const EmbeddingVector& from, const EmbeddingVector& direction, double distance);

/// Closest point to `candidate` on the spherical cap of chord radius `epsilon`
/// around `center` (along their great circle).
EmbeddingVector project_to_cap(const EmbeddingVector& center, const EmbeddingVector& candidate, double epsilon);

/// Per channel, an independent random direction; moves `epsilon` toward it.
QuerySample naive_attack(const QuerySample& query, const AttackConfig& config);

/// Smooth part of the adaptive objective for fixed support sets:
///   L = (1/N) sum_i cos(q_i, m_i) - alpha * sum_i sum_j cos(q_i, s_ij)
/// where m_i is the mean of the true identity's gallery embeddings in expert
/// i and s_ij are the current support embeddings of other identities
/// (supports of the true identity are left out of the affinity term).
/// Embeddings may be off the sphere; the cosine normalizes them.
struct AdaptiveObjective {
    std::vector<std::vector<double>> identity_means;        // per expert
    std::vector<std::vector<std::vector<double>>> supports;  // per expert, per rank
    double affinity_weight = 1.0;

    double value(std::span<const std::vector<double>> channels) const;
    std::vector<std::vector<double>> gradient(std::span<const std::vector<double>> channels) const;
};

/// Builds the objective for the given support sets and the query's identity.
AdaptiveObjective make_adaptive_objective(const QuerySample& query, std::span<const ExpertIndex> indexes,
                                          std::span<const SupportSet> supports, double affinity_weight);

/// Targeted objective: L = -(1/N) sum_i cos(q_i, c_i) for per-expert target centroids c_i.
struct TargetedObjective {
    std::vector<std::vector<double>> centroids;  // per expert, unit norm

    double value(std::span<const std::vector<double>> channels) const;
    std::vector<std::vector<double>> gradient(std::span<const std::vector<double>> channels) const;
};

TargetedObjective make_targeted_objective(std::span<const ExpertIndex> indexes, IdentityId target_identity);

/// l_* = -(sum A_qs + sum A_ss + sum A_ce) of the query's current context.
double context_affinity_loss(const QuerySample& query, std::span<const SupportSet> supports);

/// Projected geodesic descent on misranking loss + affinity_weight * l_*.
QuerySample adaptive_attack(const QuerySample& query, std::span<const ExpertIndex> indexes,
                            const DetectorModel& detector, const AttackConfig& config);

struct TargetedResult {
    QuerySample query;
    bool success = false;
};

/// Pulls every channel toward the target identity's centroid in that expert.
/// Success: in every expert at least half of the top-K belong to the target.
TargetedResult targeted_multi_attack(const QuerySample& query, std::span<const ExpertIndex> indexes,
                                     IdentityId target_identity, const AttackConfig& config);

/// Deterministic choice of a wrong identity for targeted runs without an explicit target.
IdentityId pick_target_identity(const QuerySample& query, std::size_t n_identities, std::uint64_t seed);

}  // namespace meaad
