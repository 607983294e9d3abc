#include "meaad/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "meaad/error.hpp"
#include "meaad/formats.hpp"
#include "meaad/relation_stats.hpp"

namespace meaad::pipeline {

using nlohmann::ordered_json;

namespace {

constexpr const char* kRecordVersion = "meaad-run v1";

ordered_json to_json(const ScenarioConfig& c) {
    return {{"identities", c.n_identities},
            {"items_per_identity", c.items_per_identity},
            {"experts", c.n_experts},
            {"dim", c.dimension},
            {"sigma", c.cluster_noise},
            {"tau", c.cross_expert_jitter},
            {"queries_per_identity", c.queries_per_identity},
            {"eval_queries_per_identity", c.eval_queries_per_identity},
            {"seed", c.seed}};
}

ordered_json to_json(const AttackConfig& c) {
    ordered_json j = {{"kind", std::string(to_string(c.kind))},
                      {"epsilon", c.epsilon},
                      {"steps", c.steps},
                      {"step_size", c.step_size},
                      {"affinity_weight", c.affinity_weight},
                      {"k", c.support_size},
                      {"refresh_interval", c.refresh_interval},
                      {"seed", c.seed}};
    j["target_identity"] = c.target_identity ? ordered_json(*c.target_identity) : ordered_json(nullptr);
    return j;
}

ordered_json to_json(const SgdConfig& c) {
    return {{"learning_rate", c.learning_rate}, {"momentum", c.momentum}, {"batch_size", c.batch_size},
            {"iterations", c.iterations},       {"seed", c.seed},         {"hidden", c.hidden}};
}

std::vector<std::string> path_strings(const std::vector<fs::path>& paths) {
    std::vector<std::string> out;
    for (const auto& p : paths) out.push_back(p.string());
    return out;
}

// Paths are stored relative to the record so a moved or copied run stays byte-identical.
void record_run(const fs::path& path, const std::string& command, ordered_json params) {
    static const std::set<std::string> path_keys = {"galleries",     "queries",      "queries_in", "queries_out",
                                                    "model",         "features",     "out",        "train_queries",
                                                    "eval_queries"};
    const fs::path base = fs::absolute(path).parent_path();
    auto relative = [&](ordered_json& v) {
        if (!v.is_string() || v.get<std::string>().empty()) return;
        v = fs::absolute(v.get<std::string>()).lexically_relative(base).generic_string();
    };
    for (auto& [key, value] : params.items()) {
        if (!path_keys.contains(key)) continue;
        if (value.is_array()) {
            for (auto& v : value) relative(v);
        } else {
            relative(value);
        }
    }
    ordered_json record = {{"format", kRecordVersion}, {"command", command}, {"params", std::move(params)}};
    write_text_file(path, record.dump(2) + "\n");
}

fs::path sibling(const fs::path& path, const std::string& suffix) { return fs::path(path.string() + suffix); }

template <typename Fn>
std::string render(Fn&& fn) {
    std::ostringstream os;
    fn(os);
    return os.str();
}

int label_of(const QuerySample& q) {
    switch (q.label) {
        case QueryLabel::Benign: return 0;
        case QueryLabel::Adversarial: return 1;
        case QueryLabel::Unknown: break;
    }
    throw Error(ErrorCode::Parse, "query " + std::to_string(q.query_id) + " has no benign/adversarial label");
}

std::vector<std::size_t> all_positions(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

std::vector<SupportSet> retrieve_supports(const QuerySample& q, std::span<const ExpertIndex> indexes, std::size_t k) {
    return extract_context(q, indexes, k).supports;
}

std::size_t count_identities(std::span<const ExpertIndex> indexes) {
    IdentityId max_id = 0;
    for (const auto& item : indexes.front().items()) max_id = std::max(max_id, item.identity_id);
    return static_cast<std::size_t>(max_id) + 1;
}

}  // namespace

std::vector<fs::path> gallery_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, "gallery directory '" + dir.string() + "' does not exist");
    std::map<std::size_t, fs::path> found;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (!name.starts_with("expert_") || !name.ends_with(".emb")) continue;
        const std::string digits = name.substr(7, name.size() - 11);
        if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) continue;
        found.emplace(std::stoul(digits), entry.path());
    }
    if (found.empty()) throw Error(ErrorCode::Io, "no expert_<i>.emb files in '" + dir.string() + "'");
    std::vector<fs::path> out;
    for (auto& [id, path] : found) out.push_back(path);
    return out;
}

std::vector<ExpertIndex> load_galleries(const fs::path& dir) {
    std::vector<ExpertIndex> out;
    for (const auto& path : gallery_files(dir)) out.push_back(load_expert_index(path));
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].dimension() != out[0].dimension()) {
            throw Error(ErrorCode::DimensionMismatch, "galleries disagree on embedding dimension");
        }
    }
    return out;
}

std::vector<QuerySample> load_query_files(const std::vector<fs::path>& files) {
    std::vector<QuerySample> out;
    std::optional<std::pair<std::size_t, std::size_t>> shape;
    for (const auto& path : files) {
        QueryFile f = load_queries(path);
        const std::pair<std::size_t, std::size_t> this_shape{f.dimension, f.n_experts};
        if (shape && *shape != this_shape) {
            throw Error(ErrorCode::DimensionMismatch, "query files disagree on dimension or expert count");
        }
        shape = this_shape;
        std::move(f.queries.begin(), f.queries.end(), std::back_inserter(out));
    }
    return out;
}

GenOutputs cmd_gen(const GenOptions& options) {
    const Scenario scenario = generate_scenario(options.scenario);
    const auto& cfg = options.scenario;
    fs::create_directories(options.out_dir);
    GenOutputs out;
    for (const auto& index : scenario.experts) {
        const fs::path path = options.out_dir / ("expert_" + std::to_string(index.expert_id()) + ".emb");
        write_text_file(path, render([&](std::ostream& os) { write_expert_index(os, index); }));
        out.galleries.push_back(path);
    }
    out.queries = options.out_dir / "queries.qry";
    write_text_file(out.queries, render([&](std::ostream& os) {
                        write_queries(os, scenario.queries, cfg.dimension, cfg.n_experts);
                    }));
    if (!scenario.eval_queries.empty()) {
        out.eval_queries = options.out_dir / "eval_queries.qry";
        write_text_file(*out.eval_queries, render([&](std::ostream& os) {
                            write_queries(os, scenario.eval_queries, cfg.dimension, cfg.n_experts);
                        }));
    }
    record_run(options.out_dir / "run_gen.json", "gen", to_json(cfg));
    return out;
}

AttackSummary cmd_attack(const AttackOptions& options) {
    const AttackConfig& cfg = options.attack;
    cfg.validate();
    QueryFile input = load_queries(options.queries_in);

    std::vector<ExpertIndex> indexes;
    if (cfg.kind != AttackKind::Naive) indexes = load_galleries(options.galleries);
    std::optional<DetectorModel> detector;
    if (cfg.kind == AttackKind::Adaptive) {
        if (!options.model) throw Error(ErrorCode::NotTrained, "adaptive attack needs --model");
        detector = load_detector(*options.model);
    }

    AttackSummary summary;
    summary.kind = cfg.kind;
    std::vector<QuerySample> attacked;
    attacked.reserve(input.queries.size());
    double displacement_sum = 0.0;
    std::size_t channels = 0;
    for (const auto& q : input.queries) {
        QuerySample a;
        switch (cfg.kind) {
            case AttackKind::Naive:
                a = naive_attack(q, cfg);
                break;
            case AttackKind::Adaptive:
                a = adaptive_attack(q, indexes, *detector, cfg);
                break;
            case AttackKind::Targeted: {
                const IdentityId target =
                    cfg.target_identity ? *cfg.target_identity : pick_target_identity(q, count_identities(indexes), cfg.seed);
                TargetedResult r = targeted_multi_attack(q, indexes, target, cfg);
                summary.successes += r.success ? 1 : 0;
                a = std::move(r.query);
                break;
            }
        }
        for (std::size_t e = 0; e < q.embeddings.size(); ++e) {
            const double d = chord_distance(q.embeddings[e], a.embeddings[e]);
            displacement_sum += d;
            summary.max_displacement = std::max(summary.max_displacement, d);
            ++channels;
        }
        attacked.push_back(std::move(a));
    }
    summary.queries = attacked.size();
    summary.mean_displacement = channels ? displacement_sum / static_cast<double>(channels) : 0.0;

    write_text_file(options.queries_out, render([&](std::ostream& os) {
                        write_queries(os, attacked, input.dimension, input.n_experts);
                    }));
    const fs::path report = options.report ? *options.report : sibling(options.queries_out, ".report.csv");
    write_text_file(report, render([&](std::ostream& os) {
                        os << "metric,value\n";
                        os << "kind," << to_string(summary.kind) << '\n';
                        os << "queries," << summary.queries << '\n';
                        if (cfg.kind == AttackKind::Targeted) {
                            os << "successes," << summary.successes << '\n';
                            os << "success_rate,"
                               << format_real(summary.queries ? static_cast<double>(summary.successes) /
                                                                    static_cast<double>(summary.queries)
                                                              : 0.0)
                               << '\n';
                        }
                        os << "mean_displacement," << format_real(summary.mean_displacement) << '\n';
                        os << "max_displacement," << format_real(summary.max_displacement) << '\n';
                    }));
    ordered_json params = to_json(cfg);
    params["galleries"] = options.galleries.string();
    params["queries_in"] = options.queries_in.string();
    params["queries_out"] = options.queries_out.string();
    params["model"] = options.model ? options.model->string() : "";
    record_run(sibling(options.queries_out, ".run.json"), "attack", params);
    return summary;
}

FeatureDataset featurize(std::span<const QuerySample> queries, std::span<const ExpertIndex> indexes, std::size_t k) {
    if (queries.empty()) throw Error(ErrorCode::Empty, "no queries to featurize");
    FeatureDataset ds;
    ds.layout = {indexes.size(), k};
    ds.examples.reserve(queries.size());
    for (const auto& q : queries) {
        const int label = label_of(q);
        ds.examples.push_back({q.query_id, assemble_context_feature(q, indexes, k).flat(), label});
    }
    return ds;
}

FeatureDataset cmd_featurize(const FeaturizeOptions& options) {
    std::vector<ExpertIndex> all = load_galleries(options.galleries);
    std::vector<QuerySample> queries = load_query_files(options.queries);
    std::vector<ExpertIndex> indexes;
    if (options.experts.empty()) {
        indexes = std::move(all);
    } else {
        for (std::size_t e : options.experts) {
            if (e >= all.size()) throw Error(ErrorCode::InvalidConfig, "expert " + std::to_string(e) + " does not exist");
            indexes.push_back(all[e]);
        }
        for (auto& q : queries) q = restrict_query(q, options.experts);
    }
    FeatureDataset ds = featurize(queries, indexes, options.k);
    write_text_file(options.out, render([&](std::ostream& os) { write_feature_dataset(os, ds); }));
    record_run(sibling(options.out, ".run.json"), "featurize",
               {{"galleries", options.galleries.string()},
                {"queries", path_strings(options.queries)},
                {"k", options.k},
                {"experts", options.experts},
                {"n", ds.layout.n_experts},
                {"d", ds.dimension()},
                {"out", options.out.string()}});
    return ds;
}

TrainedDetector cmd_train(const TrainOptions& options) {
    const FeatureDataset ds = load_feature_dataset(options.features);
    if (auto warning = balance_warning(ds.count(0), ds.count(1))) std::cerr << "warning: " << *warning << '\n';
    TrainedDetector trained = train_detector(ds, options.sgd);
    write_text_file(options.out, render([&](std::ostream& os) { write_detector(os, trained.model); }));
    const fs::path loss = options.loss_csv ? *options.loss_csv : sibling(options.out, ".loss.csv");
    write_text_file(loss, render([&](std::ostream& os) { write_loss_csv(os, trained.batch_losses); }));
    ordered_json params = to_json(options.sgd);
    params["features"] = options.features.string();
    params["out"] = options.out.string();
    params["initial_loss"] = trained.initial_loss;
    params["final_loss"] = trained.final_loss;
    record_run(sibling(options.out, ".run.json"), "train", params);
    return trained;
}

std::optional<std::string> balance_warning(std::size_t benign, std::size_t adversarial) {
    if (benign == adversarial) return std::nullopt;
    return "evaluation classes are unbalanced (" + std::to_string(benign) + " benign vs " +
           std::to_string(adversarial) + " adversarial)";
}

MetricsReport evaluate_detector(const DetectorModel& model, const FeatureDataset& dataset, double threshold) {
    if (dataset.examples.empty()) throw Error(ErrorCode::Empty, "no examples to evaluate");
    if (model.layout.n_experts != 0 &&
        (model.layout.n_experts != dataset.layout.n_experts || model.layout.support_size != dataset.layout.support_size)) {
        throw Error(ErrorCode::DimensionMismatch, "model was trained for N=" + std::to_string(model.layout.n_experts) +
                                                      ", K=" + std::to_string(model.layout.support_size) +
                                                      " but the features have N=" +
                                                      std::to_string(dataset.layout.n_experts) +
                                                      ", K=" + std::to_string(dataset.layout.support_size));
    }
    const auto preds = predict_all(model, dataset.examples, threshold);
    std::vector<int> labels, predicted;
    std::vector<double> scores;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        labels.push_back(dataset.examples[i].label);
        predicted.push_back(preds[i].label);
        // The logit ranks examples like the probability but does not saturate.
        scores.push_back(preds[i].logit);
    }
    return evaluate(predicted, scores, labels);
}

EvalResult cmd_eval(const EvalOptions& options) {
    EvalResult result;
    std::size_t benign = 0;
    std::size_t adversarial = 0;
    std::string name;
    ordered_json params;
    if (options.detector == DetectorKind::Mlp) {
        const DetectorModel model = load_detector(options.model);
        const FeatureDataset ds = load_feature_dataset(options.features);
        benign = ds.count(0);
        adversarial = ds.count(1);
        result.report = evaluate_detector(model, ds, options.probability_threshold);
        name = "mlp";
        params = {{"detector", "mlp"},
                  {"features", options.features.string()},
                  {"model", options.model.string()},
                  {"threshold", options.probability_threshold}};
    } else {
        const auto indexes = load_galleries(options.galleries);
        const auto queries = load_query_files(options.queries);
        if (queries.empty()) throw Error(ErrorCode::Empty, "no queries to evaluate");
        std::vector<int> labels, predicted;
        std::vector<double> scores;
        for (const auto& q : queries) {
            const auto supports = retrieve_supports(q, indexes, options.k);
            const VoteResult vote = voting_detect(supports, options.vote_threshold);
            labels.push_back(label_of(q));
            predicted.push_back(vote.label);
            // Fewer common samples means more suspicious.
            scores.push_back(-static_cast<double>(vote.common_count));
        }
        benign = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 0));
        adversarial = labels.size() - benign;
        result.report = evaluate(predicted, scores, labels);
        name = "voting";
        params = {{"detector", "voting"},
                  {"galleries", options.galleries.string()},
                  {"queries", path_strings(options.queries)},
                  {"k", options.k},
                  {"threshold", options.vote_threshold}};
    }
    if (auto warning = balance_warning(benign, adversarial)) result.warnings.push_back(*warning);

    if (options.out) {
        write_text_file(*options.out, render([&](std::ostream& os) {
                            write_metrics_header(os);
                            write_metrics_row(os, name, result.report);
                        }));
        record_run(sibling(*options.out, ".run.json"), "eval", params);
    }
    if (options.roc_out) {
        write_text_file(*options.roc_out, render([&](std::ostream& os) { write_roc_csv(os, result.report.roc_points); }));
    }
    return result;
}

std::vector<std::vector<std::size_t>> default_expert_subsets(std::size_t n_experts) {
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t n = 1; n <= n_experts; ++n) out.push_back(all_positions(n));
    for (std::size_t n = 2; n <= n_experts; ++n) {
        std::vector<std::size_t> subset;
        for (std::size_t e = 1; e < n; ++e) subset.push_back(e);
        out.push_back(subset);
    }
    return out;
}

std::vector<FeatureBlocks> all_feature_subsets() {
    return {{false, false, true}, {true, false, false}, {false, true, false}, {true, false, true},
            {false, true, true},  {true, true, false},  {true, true, true}};
}

namespace {

struct CachedQuery {
    QuerySample query;
    std::vector<SupportSet> supports;  // all experts, K = max K in the grid
    int label = 0;
};

std::vector<CachedQuery> cache_supports(std::span<const QuerySample> queries, std::span<const ExpertIndex> indexes,
                                        std::size_t k_max) {
    std::vector<CachedQuery> out;
    out.reserve(queries.size());
    for (const auto& q : queries) out.push_back({q, retrieve_supports(q, indexes, k_max), label_of(q)});
    return out;
}

std::vector<LabeledExample> examples_for(const std::vector<CachedQuery>& cached, std::span<const std::size_t> experts,
                                         std::size_t k, const FeatureBlocks& blocks) {
    std::vector<LabeledExample> out;
    out.reserve(cached.size());
    for (const auto& c : cached) {
        const auto supports = restrict_supports(c.supports, experts, k);
        const QuerySample q = restrict_query(c.query, experts);
        const ContextFeature f = build_context_feature(q, supports);
        out.push_back({c.query.query_id, select_blocks(f.flat(), f.layout(), blocks), c.label});
    }
    return out;
}

std::string join(std::span<const std::size_t> v, char sep) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? std::string(1, sep) : "") + std::to_string(v[i]);
    return s;
}

}  // namespace

std::vector<AblationRow> run_ablation(std::span<const ExpertIndex> indexes, std::span<const QuerySample> train,
                                      std::span<const QuerySample> eval, const AblateOptions& options) {
    if (train.empty() || eval.empty()) throw Error(ErrorCode::Empty, "ablation needs training and evaluation queries");
    const auto subsets = options.expert_subsets.empty() ? default_expert_subsets(indexes.size()) : options.expert_subsets;
    const auto features = options.feature_subsets.empty() ? all_feature_subsets() : options.feature_subsets;
    const auto everyone = all_positions(indexes.size());

    struct Config {
        std::string group;
        std::vector<std::size_t> experts;
        std::size_t k;
        FeatureBlocks blocks;
    };
    std::vector<Config> grid;
    for (const auto& s : subsets) grid.push_back({"experts", s, options.k, {}});
    for (std::size_t k : options.support_sizes) grid.push_back({"support_size", everyone, k, {}});
    for (const auto& b : features) grid.push_back({"features", everyone, options.k, b});

    std::size_t k_max = 0;
    for (const auto& c : grid) {
        if (c.experts.empty()) throw Error(ErrorCode::InvalidConfig, "empty expert subset");
        k_max = std::max(k_max, c.k);
    }
    const auto train_cache = cache_supports(train, indexes, k_max);
    const auto eval_cache = cache_supports(eval, indexes, k_max);

    std::map<std::string, MetricsReport> done;
    std::vector<AblationRow> rows;
    for (const auto& c : grid) {
        const FeatureLayout layout{c.experts.size(), c.k};
        AblationRow row{c.group, c.experts, c.k, c.blocks, layout.dimension(c.blocks), {}};
        if (row.dimension == 0) continue;  // e.g. ce-only with one expert, or ss-only at K = 1
        const std::string key = join(c.experts, '+') + "|" + std::to_string(c.k) + "|" + c.blocks.to_string();
        if (auto it = done.find(key); it != done.end()) {
            row.report = it->second;
        } else {
            const auto train_examples = examples_for(train_cache, c.experts, c.k, c.blocks);
            const auto eval_examples = examples_for(eval_cache, c.experts, c.k, c.blocks);
            const TrainedDetector trained = train_detector(train_examples, options.sgd);
            const auto preds = predict_all(trained.model, eval_examples);
            std::vector<int> labels, predicted;
            std::vector<double> scores;
            for (std::size_t i = 0; i < preds.size(); ++i) {
                labels.push_back(eval_examples[i].label);
                predicted.push_back(preds[i].label);
                scores.push_back(preds[i].logit);
            }
            row.report = evaluate(predicted, scores, labels);
            done.emplace(key, row.report);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<AblationRow> cmd_ablate(const AblateOptions& options) {
    const auto indexes = load_galleries(options.galleries);
    const auto train = load_query_files(options.train_queries);
    const auto eval = load_query_files(options.eval_queries);
    const auto rows = run_ablation(indexes, train, eval, options);
    write_text_file(options.out, render([&](std::ostream& os) {
                        os << "group,experts,k,blocks,d,accuracy,roc_auc,f1,precision,recall\n";
                        for (const auto& r : rows) {
                            os << r.group << ',' << join(r.experts, '+') << ',' << r.k << ',' << '"'
                               << r.blocks.to_string() << '"' << ',' << r.dimension << ','
                               << format_real(r.report.accuracy) << ',' << format_real(r.report.roc_auc) << ','
                               << format_real(r.report.f1) << ',' << format_real(r.report.precision) << ','
                               << format_real(r.report.recall) << '\n';
                        }
                    }));
    ordered_json params = to_json(options.sgd);
    params["galleries"] = options.galleries.string();
    params["train_queries"] = path_strings(options.train_queries);
    params["eval_queries"] = path_strings(options.eval_queries);
    params["k"] = options.k;
    params["support_sizes"] = options.support_sizes;
    record_run(sibling(options.out, ".run.json"), "ablate", params);
    return rows;
}

void cmd_stats(const StatsOptions& options) {
    const auto indexes = load_galleries(options.galleries);
    const auto queries = load_query_files(options.queries);
    if (queries.empty()) throw Error(ErrorCode::Empty, "no queries");
    const auto rows = relation_stats(queries, indexes, options.k);
    write_text_file(options.out, render([&](std::ostream& os) { write_relation_stats_csv(os, rows); }));
    record_run(sibling(options.out, ".run.json"), "stats",
               {{"galleries", options.galleries.string()}, {"queries", path_strings(options.queries)}, {"k", options.k}});
}

PipelineResult run_pipeline(const PipelineOptions& options) {
    if (options.scenario.eval_queries_per_identity == 0) {
        throw Error(ErrorCode::InvalidConfig, "pipeline needs held-out evaluation queries");
    }
    const fs::path& dir = options.out_dir;
    const GenOutputs gen = cmd_gen({options.scenario, dir});

    AttackOptions attack{options.attack, dir, gen.queries, dir / "queries_attacked.qry", std::nullopt, std::nullopt};
    attack.attack.kind = AttackKind::Naive;
    cmd_attack(attack);
    attack.queries_in = *gen.eval_queries;
    attack.queries_out = dir / "eval_queries_attacked.qry";
    cmd_attack(attack);

    cmd_featurize({dir, {gen.queries, dir / "queries_attacked.qry"}, options.k, {}, dir / "train.feat"});
    cmd_featurize({dir, {*gen.eval_queries, dir / "eval_queries_attacked.qry"}, options.k, {}, dir / "eval.feat"});

    PipelineResult result;
    result.detector = cmd_train({dir / "train.feat", options.sgd, dir / "detector.model", std::nullopt});

    EvalOptions mlp;
    mlp.features = dir / "eval.feat";
    mlp.model = dir / "detector.model";
    mlp.out = dir / "eval_mlp.csv";
    mlp.roc_out = dir / "eval_mlp_roc.csv";
    result.mlp = cmd_eval(mlp).report;

    EvalOptions voting;
    voting.detector = DetectorKind::Voting;
    voting.galleries = dir;
    voting.queries = {*gen.eval_queries, dir / "eval_queries_attacked.qry"};
    voting.k = options.k;
    voting.out = dir / "eval_voting.csv";
    result.voting = cmd_eval(voting).report;
    return result;
}

}  // namespace meaad::pipeline
