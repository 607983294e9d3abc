#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "meaad/attacks.hpp"
#include "meaad/context_features.hpp"
#include "meaad/detector.hpp"
#include "meaad/metrics.hpp"
#include "meaad/scenario.hpp"

namespace meaad::pipeline {

namespace fs = std::filesystem;

/// Paths of the gallery files in `dir` (expert_<i>.emb), ordered by expert id.
std::vector<fs::path> gallery_files(const fs::path& dir);
std::vector<ExpertIndex> load_galleries(const fs::path& dir);

/// Queries from several files, concatenated in order. All files must agree on (D, N).
std::vector<QuerySample> load_query_files(const std::vector<fs::path>& files);

// gen ------------------------------------------------------------------------

struct GenOptions {
    ScenarioConfig scenario;
    fs::path out_dir;
};

struct GenOutputs {
    std::vector<fs::path> galleries;
    fs::path queries;
    std::optional<fs::path> eval_queries;
};

GenOutputs cmd_gen(const GenOptions& options);

// attack ---------------------------------------------------------------------

struct AttackOptions {
    AttackConfig attack;
    fs::path galleries;  // required for adaptive/targeted
    fs::path queries_in;
    fs::path queries_out;
    std::optional<fs::path> model;   // adaptive only
    std::optional<fs::path> report;  // defaults to <queries_out>.report.csv
};

struct AttackSummary {
    AttackKind kind = AttackKind::Naive;
    std::size_t queries = 0;
    std::size_t successes = 0;  // targeted only
    double mean_displacement = 0.0;
    double max_displacement = 0.0;
};

AttackSummary cmd_attack(const AttackOptions& options);

// featurize ------------------------------------------------------------------

struct FeaturizeOptions {
    fs::path galleries;
    std::vector<fs::path> queries;
    std::size_t k = 15;
    std::vector<std::size_t> experts;  // empty = all, by position
    fs::path out;
};

/// Features of labeled queries (benign -> 0, adversarial -> 1).
FeatureDataset featurize(std::span<const QuerySample> queries, std::span<const ExpertIndex> indexes,
                         std::size_t k);

FeatureDataset cmd_featurize(const FeaturizeOptions& options);

// train ----------------------------------------------------------------------

struct TrainOptions {
    fs::path features;
    SgdConfig sgd;
    fs::path out;
    std::optional<fs::path> loss_csv;  // defaults to <out>.loss.csv
};

TrainedDetector cmd_train(const TrainOptions& options);

// eval -----------------------------------------------------------------------

enum class DetectorKind { Mlp, Voting };

struct EvalOptions {
    DetectorKind detector = DetectorKind::Mlp;
    // mlp
    fs::path features;
    fs::path model;
    double probability_threshold = 0.5;
    // voting
    fs::path galleries;
    std::vector<fs::path> queries;
    std::size_t k = 15;
    std::size_t vote_threshold = 5;

    std::optional<fs::path> out;  // metrics CSV
    std::optional<fs::path> roc_out;
};

struct EvalResult {
    MetricsReport report;
    std::vector<std::string> warnings;
};

/// Balanced-class warning text, or nothing when the classes are balanced.
std::optional<std::string> balance_warning(std::size_t benign, std::size_t adversarial);

MetricsReport evaluate_detector(const DetectorModel& model, const FeatureDataset& dataset, double threshold = 0.5);

EvalResult cmd_eval(const EvalOptions& options);

// ablate ---------------------------------------------------------------------

struct AblationRow {
    std::string group;  // experts | support_size | features
    std::vector<std::size_t> experts;
    std::size_t k = 0;
    FeatureBlocks blocks;
    std::size_t dimension = 0;
    MetricsReport report;
};

struct AblateOptions {
    fs::path galleries;
    std::vector<fs::path> train_queries;
    std::vector<fs::path> eval_queries;
    SgdConfig sgd;
    std::size_t k = 15;
    std::vector<std::vector<std::size_t>> expert_subsets;  // empty = defaults
    std::vector<std::size_t> support_sizes = {1, 5, 10, 15, 20, 30};
    std::vector<FeatureBlocks> feature_subsets;  // empty = all seven combinations
    fs::path out;
};

/// Default expert subsets for N experts: growing prefixes {0}, {0,1}, ...,
/// then the same prefixes with expert 0 left out.
std::vector<std::vector<std::size_t>> default_expert_subsets(std::size_t n_experts);
std::vector<FeatureBlocks> all_feature_subsets();

std::vector<AblationRow> run_ablation(std::span<const ExpertIndex> indexes, std::span<const QuerySample> train,
                                      std::span<const QuerySample> eval, const AblateOptions& options);

std::vector<AblationRow> cmd_ablate(const AblateOptions& options);

// stats ----------------------------------------------------------------------

struct StatsOptions {
    fs::path galleries;
    std::vector<fs::path> queries;
    std::size_t k = 15;
    fs::path out;
};

void cmd_stats(const StatsOptions& options);

// pipeline -------------------------------------------------------------------

/// gen -> naive attack -> featurize -> train -> eval in one output directory.
struct PipelineOptions {
    ScenarioConfig scenario;  // eval_queries_per_identity must be > 0
    AttackConfig attack;      // naive
    SgdConfig sgd;
    std::size_t k = 15;
    fs::path out_dir;
};

struct PipelineResult {
    MetricsReport mlp;
    MetricsReport voting;
    TrainedDetector detector;
};

PipelineResult run_pipeline(const PipelineOptions& options);

}  // namespace meaad::pipeline
