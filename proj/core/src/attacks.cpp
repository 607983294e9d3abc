#include "meaad/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "meaad/context_features.hpp"
#include "meaad/error.hpp"

namespace meaad {

namespace {

std::mt19937_64 seeded_stream(std::uint64_t seed, std::uint64_t salt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(salt >> 32)};
    return std::mt19937_64(seq);
}

double norm(std::span<const double> v) noexcept { return std::sqrt(dot(v, v)); }

/// q.v / |q| and its gradient with respect to q.
double scaled_projection(std::span<const double> q, std::span<const double> v) noexcept {
    return dot(q, v) / norm(q);
}

void add_scaled_projection_gradient(std::span<const double> q, std::span<const double> v, double weight,
                                    std::vector<double>& out) {
    const double qn = norm(q);
    const double c = dot(q, v) / (qn * qn);
    for (std::size_t i = 0; i < q.size(); ++i) out[i] += weight * (v[i] - c * q[i]) / qn;
}

/// One geodesic step of `angle` radians from unit `q` along tangent direction `dir`.
EmbeddingVector geodesic_step(const EmbeddingVector& q, std::span<const double> dir, double angle) {
    const auto u = q.values();
    std::vector<double> t(dir.begin(), dir.end());
    const double along = dot(t, u);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] -= along * u[i];
    const double tn = norm(t);
    if (tn < 1e-15 || angle <= 0.0) return q;
    std::vector<double> next(u.size());
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    for (std::size_t i = 0; i < u.size(); ++i) next[i] = c * u[i] + s * t[i] / tn;
    return normalize(next);
}

std::vector<double> identity_mean(const ExpertIndex& index, IdentityId identity) {
    const auto positions = index.positions_of_identity(identity);
    if (positions.empty()) {
        throw Error(ErrorCode::InvalidConfig, "identity " + std::to_string(identity) + " is absent from expert " +
                                                  std::to_string(index.expert_id()));
    }
    std::vector<double> mean(index.dimension(), 0.0);
    for (std::size_t p : positions) {
        const auto e = index.items()[p].embedding.values();
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += e[i];
    }
    for (double& x : mean) x /= static_cast<double>(positions.size());
    return mean;
}

std::vector<std::vector<double>> raw_channels(const std::vector<EmbeddingVector>& embeddings) {
    std::vector<std::vector<double>> out;
    out.reserve(embeddings.size());
    for (const auto& e : embeddings) out.emplace_back(e.values().begin(), e.values().end());
    return out;
}

std::vector<SupportSet> retrieve_all(const QuerySample& query, std::span<const ExpertIndex> indexes,
                                     std::size_t k) {
    std::vector<SupportSet> out;
    out.reserve(indexes.size());
    for (std::size_t i = 0; i < indexes.size(); ++i) {
        out.push_back(retrieve_top_k(indexes[i], query.embeddings[i], k, {}, query.query_id));
    }
    return out;
}

}  // namespace

std::string_view to_string(AttackKind kind) noexcept {
    switch (kind) {
        case AttackKind::Naive: return "naive";
        case AttackKind::Adaptive: return "adaptive";
        case AttackKind::Targeted: return "targeted";
    }
    return "naive";
}

AttackKind parse_attack_kind(std::string_view text) {
    if (text == "naive") return AttackKind::Naive;
    if (text == "adaptive") return AttackKind::Adaptive;
    if (text == "targeted") return AttackKind::Targeted;
    throw Error(ErrorCode::InvalidConfig, "unknown attack kind '" + std::string(text) + "'");
}

void AttackConfig::validate() const {
    if (!std::isfinite(epsilon) || epsilon < 0.0) throw Error(ErrorCode::InvalidConfig, "epsilon must be finite and >= 0");
    if (!std::isfinite(step_size) || step_size < 0.0) throw Error(ErrorCode::InvalidConfig, "step_size must be >= 0");
    if (!std::isfinite(affinity_weight)) throw Error(ErrorCode::InvalidConfig, "affinity_weight must be finite");
    if (support_size == 0) throw Error(ErrorCode::InvalidConfig, "support_size must be positive");
    if (refresh_interval == 0) throw Error(ErrorCode::InvalidConfig, "refresh_interval must be positive");
}

double chord_distance(const EmbeddingVector& a, const EmbeddingVector& b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.dimension(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

EmbeddingVector move_toward(const EmbeddingVector& from, const EmbeddingVector& direction, double distance) {
    if (from.dimension() != direction.dimension()) {
        throw Error(ErrorCode::DimensionMismatch, "move_toward: dimension mismatch");
    }
    if (!(distance > 0.0)) return from;
    const auto u = from.values();
    const auto w = direction.values();
    const double along = dot(u, w);
    std::vector<double> t(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) t[i] = w[i] - along * u[i];
    double tn = norm(t);
    double theta = std::atan2(tn, along);
    if (tn < 1e-12) {
        if (along > 0.0) return from;
        // Antipodal: any great circle works; rotate toward the axis where `from` is smallest.
        std::size_t axis = 0;
        for (std::size_t i = 1; i < u.size(); ++i) {
            if (std::abs(u[i]) < std::abs(u[axis])) axis = i;
        }
        for (std::size_t i = 0; i < u.size(); ++i) t[i] = -u[axis] * u[i];
        t[axis] += 1.0;
        tn = norm(t);
        theta = std::numbers::pi;
    }
    const double reach = 2.0 * std::asin(std::min(distance, 2.0) / 2.0);
    const double angle = std::min(reach, theta);
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = c * u[i] + s * t[i] / tn;
    EmbeddingVector moved = normalize(out);
    // Rounding in normalize() may nudge the point past the budget by a few ulps.
    if (distance < 2.0 && chord_distance(from, moved) > distance) {
        const double shrink = 2.0 * std::asin(distance / 2.0) * (1.0 - 1e-12);
        for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::cos(shrink) * u[i] + std::sin(shrink) * t[i] / tn;
        moved = normalize(out);
    }
    return moved;
}

EmbeddingVector project_to_cap(const EmbeddingVector& center, const EmbeddingVector& candidate, double epsilon) {
    if (chord_distance(center, candidate) <= epsilon) return candidate;
    return move_toward(center, candidate, epsilon);
}

QuerySample naive_attack(const QuerySample& query, const AttackConfig& config) {
    config.validate();
    QuerySample out = query;
    out.label = QueryLabel::Adversarial;
    if (config.epsilon == 0.0) return out;
    auto rng = seeded_stream(config.seed, query.query_id);
    std::normal_distribution<double> normal;
    for (auto& embedding : out.embeddings) {
        std::vector<double> dir(embedding.dimension());
        for (double& x : dir) x = normal(rng);
        embedding = move_toward(embedding, normalize(dir), config.epsilon);
    }
    return out;
}

double AdaptiveObjective::value(std::span<const std::vector<double>> channels) const {
    const double n = static_cast<double>(channels.size());
    double misrank = 0.0;
    double affinity = 0.0;
    for (std::size_t i = 0; i < channels.size(); ++i) {
        misrank += scaled_projection(channels[i], identity_means[i]);
        for (const auto& s : supports[i]) affinity += scaled_projection(channels[i], s);
    }
    return misrank / n - affinity_weight * affinity;
}

std::vector<std::vector<double>> AdaptiveObjective::gradient(std::span<const std::vector<double>> channels) const {
    const double n = static_cast<double>(channels.size());
    std::vector<std::vector<double>> out;
    out.reserve(channels.size());
    for (std::size_t i = 0; i < channels.size(); ++i) {
        std::vector<double> g(channels[i].size(), 0.0);
        add_scaled_projection_gradient(channels[i], identity_means[i], 1.0 / n, g);
        for (const auto& s : supports[i]) add_scaled_projection_gradient(channels[i], s, -affinity_weight, g);
        out.push_back(std::move(g));
    }
    return out;
}

namespace {

// Supports that do not belong to the query's own identity. Pulling toward
// own-identity supports would undo the misranking term step for step.
std::vector<std::vector<double>> foreign_support_rows(const SupportSet& support, IdentityId own) {
    std::vector<std::vector<double>> rows;
    for (const auto& e : support.entries) {
        if (e.identity_id == own) continue;
        rows.emplace_back(e.embedding.values().begin(), e.embedding.values().end());
    }
    return rows;
}

}  // namespace

AdaptiveObjective make_adaptive_objective(const QuerySample& query, std::span<const ExpertIndex> indexes,
                                          std::span<const SupportSet> supports, double affinity_weight) {
    if (supports.size() != indexes.size()) {
        throw Error(ErrorCode::DimensionMismatch, "one support set per expert is required");
    }
    AdaptiveObjective obj;
    obj.affinity_weight = affinity_weight;
    for (std::size_t i = 0; i < indexes.size(); ++i) {
        obj.identity_means.push_back(identity_mean(indexes[i], query.identity_id));
        obj.supports.push_back(foreign_support_rows(supports[i], query.identity_id));
    }
    return obj;
}

double TargetedObjective::value(std::span<const std::vector<double>> channels) const {
    double total = 0.0;
    for (std::size_t i = 0; i < channels.size(); ++i) total += scaled_projection(channels[i], centroids[i]);
    return -total / static_cast<double>(channels.size());
}

std::vector<std::vector<double>> TargetedObjective::gradient(std::span<const std::vector<double>> channels) const {
    std::vector<std::vector<double>> out;
    out.reserve(channels.size());
    const double w = -1.0 / static_cast<double>(channels.size());
    for (std::size_t i = 0; i < channels.size(); ++i) {
        std::vector<double> g(channels[i].size(), 0.0);
        add_scaled_projection_gradient(channels[i], centroids[i], w, g);
        out.push_back(std::move(g));
    }
    return out;
}

TargetedObjective make_targeted_objective(std::span<const ExpertIndex> indexes, IdentityId target_identity) {
    TargetedObjective obj;
    for (const auto& index : indexes) {
        const auto mean = identity_mean(index, target_identity);
        const auto unit = normalize(mean);
        obj.centroids.emplace_back(unit.values().begin(), unit.values().end());
    }
    return obj;
}

double context_affinity_loss(const QuerySample& query, std::span<const SupportSet> supports) {
    const ContextFeature f = build_context_feature(query, supports);
    double total = 0.0;
    for (double x : f.qs_block) total += x;
    for (double x : f.ss_block) total += x;
    for (double x : f.ce_block) total += x;
    return -total;
}

QuerySample adaptive_attack(const QuerySample& query, std::span<const ExpertIndex> indexes,
                            const DetectorModel& detector, const AttackConfig& config) {
    config.validate();
    if (detector.input_dim() == 0) throw Error(ErrorCode::NotTrained, "adaptive attack needs a trained detector");
    if (detector.layout.n_experts != indexes.size() || detector.layout.support_size != config.support_size) {
        throw Error(ErrorCode::InvalidConfig,
                    "detector was trained for N=" + std::to_string(detector.layout.n_experts) +
                        ", K=" + std::to_string(detector.layout.support_size) + " but the attack uses N=" +
                        std::to_string(indexes.size()) + ", K=" + std::to_string(config.support_size));
    }
    validate_query(query, indexes);

    QuerySample current = query;
    current.label = QueryLabel::Adversarial;
    if (config.steps == 0 || config.epsilon == 0.0) return current;

    std::vector<SupportSet> supports = retrieve_all(current, indexes, config.support_size);
    AdaptiveObjective objective = make_adaptive_objective(current, indexes, supports, config.affinity_weight);
    for (std::size_t step = 0; step < config.steps; ++step) {
        if (step > 0 && step % config.refresh_interval == 0) {
            supports = retrieve_all(current, indexes, config.support_size);
            objective.supports.clear();
            for (const auto& s : supports) objective.supports.push_back(foreign_support_rows(s, query.identity_id));
        }
        const auto channels = raw_channels(current.embeddings);
        const auto grad = objective.gradient(channels);
        for (std::size_t i = 0; i < channels.size(); ++i) {
            std::vector<double> descent(grad[i].size());
            for (std::size_t j = 0; j < descent.size(); ++j) descent[j] = -grad[i][j];
            const EmbeddingVector stepped = geodesic_step(current.embeddings[i], descent, config.step_size);
            current.embeddings[i] = project_to_cap(query.embeddings[i], stepped, config.epsilon);
        }
    }
    return current;
}

TargetedResult targeted_multi_attack(const QuerySample& query, std::span<const ExpertIndex> indexes,
                                     IdentityId target_identity, const AttackConfig& config) {
    config.validate();
    validate_query(query, indexes);
    if (target_identity == query.identity_id) {
        throw Error(ErrorCode::InvalidConfig, "target identity equals the query's own identity");
    }
    const TargetedObjective objective = make_targeted_objective(indexes, target_identity);

    TargetedResult result{query, false};
    QuerySample& current = result.query;
    current.label = QueryLabel::Adversarial;
    for (std::size_t step = 0; step < config.steps && config.epsilon > 0.0; ++step) {
        bool moved = false;
        for (std::size_t i = 0; i < current.embeddings.size(); ++i) {
            const auto u = current.embeddings[i].values();
            const auto& c = objective.centroids[i];
            const double along = dot(u, c);
            std::vector<double> toward(u.size());
            for (std::size_t j = 0; j < u.size(); ++j) toward[j] = c[j] - along * u[j];
            const double remaining = std::atan2(norm(toward), along);
            if (remaining < 1e-12) continue;
            const EmbeddingVector stepped =
                geodesic_step(current.embeddings[i], toward, std::min(config.step_size, remaining));
            const EmbeddingVector projected = project_to_cap(query.embeddings[i], stepped, config.epsilon);
            moved = moved || !(projected == current.embeddings[i]);
            current.embeddings[i] = projected;
        }
        if (!moved) break;
    }

    const auto supports = retrieve_all(current, indexes, config.support_size);
    result.success = std::all_of(supports.begin(), supports.end(), [&](const SupportSet& s) {
        const auto hits = std::count_if(s.entries.begin(), s.entries.end(),
                                        [&](const SupportEntry& e) { return e.identity_id == target_identity; });
        return 2 * static_cast<std::size_t>(hits) >= s.size();
    });
    return result;
}

IdentityId pick_target_identity(const QuerySample& query, std::size_t n_identities, std::uint64_t seed) {
    if (n_identities < 2) throw Error(ErrorCode::InvalidConfig, "targeted attack needs at least two identities");
    auto rng = seeded_stream(seed ^ 0x7461726765747364ULL, query.query_id);
    std::uniform_int_distribution<std::size_t> pick(0, n_identities - 2);
    auto t = static_cast<IdentityId>(pick(rng));
    if (t >= query.identity_id) ++t;
    return t;
}

}  // namespace meaad
