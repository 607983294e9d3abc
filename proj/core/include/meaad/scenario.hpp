#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "meaad/embedding.hpp"

namespace meaad {

/// Synthetic multi-expert gallery: identity clusters on the unit sphere.
struct ScenarioConfig {
    std::size_t n_identities = 50;
    std::size_t items_per_identity = 20;
    std::size_t n_experts = 4;
    std::size_t dimension = 128;
    double cluster_noise = 0.05;        // sigma, shared by all experts for one sample
    double cross_expert_jitter = 0.02;  // tau, drawn independently per expert
    std::size_t queries_per_identity = 40;
    std::size_t eval_queries_per_identity = 0;
    std::uint64_t seed = 7;

    void validate() const;
};

struct Scenario {
    std::vector<ExpertIndex> experts;
    std::vector<QuerySample> queries;       // benign, ids 0..
    std::vector<QuerySample> eval_queries;  // benign, ids continue after `queries`
};

/// Each sample of identity c (gallery item or query) is, in expert e,
///   normalize(base_c + sigma * n + tau * j_e)
/// with n shared across experts and j_e drawn per expert, all standard normal.
/// Deterministic in `config.seed`.
Scenario generate_scenario(const ScenarioConfig& config);

}  // namespace meaad
