#include "meaad/scenario.hpp"

#include <cmath>
#include <random>
#include <string>

#include "meaad/error.hpp"

namespace meaad {

void ScenarioConfig::validate() const {
    if (n_identities == 0 || items_per_identity == 0) {
        throw Error(ErrorCode::InvalidConfig, "scenario needs at least one identity and one item per identity");
    }
    if (n_identities * items_per_identity < 2) {
        throw Error(ErrorCode::InvalidConfig, "gallery must hold at least K+1 >= 2 items");
    }
    if (n_experts == 0) throw Error(ErrorCode::InvalidConfig, "scenario needs at least one expert");
    if (dimension < 2) throw Error(ErrorCode::InvalidConfig, "embedding dimension must be >= 2");
    if (!std::isfinite(cluster_noise) || cluster_noise < 0.0) {
        throw Error(ErrorCode::InvalidConfig, "cluster_noise must be finite and >= 0");
    }
    if (!std::isfinite(cross_expert_jitter) || cross_expert_jitter < 0.0) {
        throw Error(ErrorCode::InvalidConfig, "cross_expert_jitter must be finite and >= 0");
    }
}

namespace {

class SampleDrawer {
public:
    SampleDrawer(const ScenarioConfig& config, std::mt19937_64& rng)
        : config_(config), rng_(rng), shared_(config.dimension), mixed_(config.dimension) {}

    std::vector<double> standard_normal() {
        std::vector<double> v(config_.dimension);
        for (double& x : v) x = normal_(rng_);
        return v;
    }

    /// One embedding per expert for a fresh sample around `base`.
    std::vector<EmbeddingVector> draw(const EmbeddingVector& base) {
        for (double& x : shared_) x = config_.cluster_noise * normal_(rng_);
        std::vector<EmbeddingVector> out;
        out.reserve(config_.n_experts);
        for (std::size_t e = 0; e < config_.n_experts; ++e) {
            for (std::size_t i = 0; i < config_.dimension; ++i) {
                mixed_[i] = base[i] + shared_[i] + config_.cross_expert_jitter * normal_(rng_);
            }
            out.push_back(normalize(mixed_));
        }
        return out;
    }

private:
    const ScenarioConfig& config_;
    std::mt19937_64& rng_;
    std::normal_distribution<double> normal_;
    std::vector<double> shared_;
    std::vector<double> mixed_;
};

}  // namespace

Scenario generate_scenario(const ScenarioConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    SampleDrawer drawer(config, rng);

    std::vector<EmbeddingVector> bases;
    bases.reserve(config.n_identities);
    for (std::size_t c = 0; c < config.n_identities; ++c) bases.push_back(normalize(drawer.standard_normal()));

    std::vector<std::vector<GalleryItem>> per_expert(config.n_experts);
    for (auto& items : per_expert) items.reserve(config.n_identities * config.items_per_identity);
    for (std::size_t c = 0; c < config.n_identities; ++c) {
        for (std::size_t k = 0; k < config.items_per_identity; ++k) {
            const ItemId id = c * config.items_per_identity + k;
            auto embeddings = drawer.draw(bases[c]);
            for (std::size_t e = 0; e < config.n_experts; ++e) {
                per_expert[e].push_back({id, static_cast<IdentityId>(c), std::move(embeddings[e])});
            }
        }
    }

    Scenario out;
    out.experts.reserve(config.n_experts);
    for (std::size_t e = 0; e < config.n_experts; ++e) {
        out.experts.emplace_back(static_cast<ExpertId>(e), std::move(per_expert[e]));
    }

    QueryId next_id = 0;
    const auto draw_queries = [&](std::size_t per_identity, std::vector<QuerySample>& into) {
        into.reserve(config.n_identities * per_identity);
        for (std::size_t c = 0; c < config.n_identities; ++c) {
            for (std::size_t q = 0; q < per_identity; ++q) {
                into.push_back({next_id++, static_cast<IdentityId>(c), drawer.draw(bases[c]), QueryLabel::Benign});
            }
        }
    };
    draw_queries(config.queries_per_identity, out.queries);
    draw_queries(config.eval_queries_per_identity, out.eval_queries);
    return out;
}

}  // namespace meaad
