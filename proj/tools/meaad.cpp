// meaad: command-line front end for the multi-expert adversarial detection library.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "meaad/error.hpp"
#include "meaad/formats.hpp"
#include "meaad/pipeline.hpp"

namespace fs = std::filesystem;
using namespace meaad;
using namespace meaad::pipeline;

namespace {

void add_sgd_options(CLI::App* cmd, SgdConfig& sgd) {
    cmd->add_option("--lr", sgd.learning_rate, "SGD learning rate")->capture_default_str();
    cmd->add_option("--momentum", sgd.momentum, "SGD momentum")->capture_default_str();
    cmd->add_option("--batch-size", sgd.batch_size, "minibatch size")->capture_default_str();
    cmd->add_option("--iterations", sgd.iterations, "SGD iterations")->capture_default_str();
    cmd->add_option("--hidden", sgd.hidden, "hidden layer widths")->capture_default_str()->delimiter(',');
    cmd->add_option("--seed", sgd.seed, "init/minibatch seed")->envname("MEAAD_SEED")->capture_default_str();
}

void add_scenario_options(CLI::App* cmd, ScenarioConfig& s) {
    cmd->add_option("--identities", s.n_identities, "number of identities")->capture_default_str();
    cmd->add_option("--per-id", s.items_per_identity, "gallery items per identity")->capture_default_str();
    cmd->add_option("--experts", s.n_experts, "number of experts")->capture_default_str();
    cmd->add_option("--dim", s.dimension, "embedding dimension")->capture_default_str();
    cmd->add_option("--sigma", s.cluster_noise, "within-identity noise")->capture_default_str();
    cmd->add_option("--tau", s.cross_expert_jitter, "per-expert jitter")->capture_default_str();
    cmd->add_option("--queries-per-id,--queries-per-identity", s.queries_per_identity, "training queries per identity")
        ->capture_default_str();
    cmd->add_option("--eval-queries-per-id", s.eval_queries_per_identity, "held-out queries per identity")
        ->capture_default_str();
    cmd->add_option("--seed", s.seed, "scenario seed")->envname("MEAAD_SEED")->capture_default_str();
}

void add_attack_options(CLI::App* cmd, AttackConfig& a, std::string& kind, long long& target) {
    cmd->add_option("--kind", kind, "naive | adaptive | targeted")->capture_default_str();
    cmd->add_option("--epsilon", a.epsilon, "chord-distance budget per expert")->capture_default_str();
    cmd->add_option("--steps", a.steps, "optimization steps")->capture_default_str();
    cmd->add_option("--step-size", a.step_size, "geodesic step angle (radians)")->capture_default_str();
    cmd->add_option("--affinity-weight", a.affinity_weight, "weight of the affinity term")->capture_default_str();
    cmd->add_option("--target", target, "target identity (targeted; default: seeded pick)");
    cmd->add_option("--refresh", a.refresh_interval, "support refresh interval")->capture_default_str();
    cmd->add_option("--seed", a.seed, "attack seed")->envname("MEAAD_SEED")->capture_default_str();
}

void resolve_attack(AttackConfig& a, const std::string& kind, long long target) {
    a.kind = parse_attack_kind(kind);
    if (target >= 0) a.target_identity = static_cast<IdentityId>(target);
}

void print_report(const std::string& name, const MetricsReport& r) {
    write_metrics_header(std::cout);
    write_metrics_row(std::cout, name, r);
}

std::vector<std::size_t> parse_index_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find_first_of(",+", start), text.size());
        const std::string token = text.substr(start, end - start);
        try {
            std::size_t used = 0;
            out.push_back(std::stoul(token, &used));
            if (used != token.size()) throw std::invalid_argument(token);
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidConfig, "bad expert list '" + text + "'");
        }
        start = end + 1;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"meaad: context-inconsistency detection of attacks on multi-expert retrieval"};
    app.set_config("--config", "", "read options from a TOML/INI file");
    app.require_subcommand(1);

    // gen
    GenOptions gen;
    auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic scenario");
    add_scenario_options(gen_cmd, gen.scenario);
    gen_cmd->add_option("--out", gen.out_dir, "output directory")->required();

    // attack
    AttackOptions attack;
    std::string attack_kind = "naive";
    long long attack_target = -1;
    fs::path attack_model, attack_report;
    auto* attack_cmd = app.add_subcommand("attack", "perturb queries");
    add_attack_options(attack_cmd, attack.attack, attack_kind, attack_target);
    attack_cmd->add_option("--k", attack.attack.support_size, "support size inside the attack")->capture_default_str();
    attack_cmd->add_option("--galleries", attack.galleries, "gallery directory (adaptive/targeted)");
    attack_cmd->add_option("--queries", attack.queries_in, "input query file")->required();
    attack_cmd->add_option("--out", attack.queries_out, "attacked query file")->required();
    attack_cmd->add_option("--model", attack_model, "detector model (adaptive)");
    attack_cmd->add_option("--report", attack_report, "attack report CSV");

    // featurize
    FeaturizeOptions feat;
    std::string feat_experts;
    auto* feat_cmd = app.add_subcommand("featurize", "compute labeled context features");
    feat_cmd->add_option("--galleries", feat.galleries, "gallery directory")->required();
    feat_cmd->add_option("--queries", feat.queries, "query files")->required();
    feat_cmd->add_option("--k", feat.k, "support size")->capture_default_str();
    feat_cmd->add_option("--experts", feat_experts, "expert positions, e.g. 0,2");
    feat_cmd->add_option("--out", feat.out, "feature file")->required();

    // train
    TrainOptions train;
    fs::path train_loss;
    auto* train_cmd = app.add_subcommand("train", "train the MLP detector");
    train_cmd->add_option("--features", train.features, "feature file")->required();
    add_sgd_options(train_cmd, train.sgd);
    train_cmd->add_option("--out", train.out, "model file")->required();
    train_cmd->add_option("--loss-csv", train_loss, "loss trajectory CSV");

    // eval
    EvalOptions eval;
    std::string eval_detector = "mlp";
    fs::path eval_out, eval_roc;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a detector");
    eval_cmd->add_option("--detector", eval_detector, "mlp | voting")
        ->check(CLI::IsMember({"mlp", "voting"}))
        ->capture_default_str();
    eval_cmd->add_option("--features", eval.features, "feature file (mlp)");
    eval_cmd->add_option("--model", eval.model, "model file (mlp)");
    eval_cmd->add_option("--prob-threshold", eval.probability_threshold, "attack probability threshold (mlp)")
        ->capture_default_str();
    eval_cmd->add_option("--galleries", eval.galleries, "gallery directory (voting)");
    eval_cmd->add_option("--queries", eval.queries, "query files (voting)");
    eval_cmd->add_option("--k", eval.k, "support size (voting)")->capture_default_str();
    eval_cmd->add_option("--threshold", eval.vote_threshold, "common-count threshold (voting)")->capture_default_str();
    eval_cmd->add_option("--out", eval_out, "metrics CSV");
    eval_cmd->add_option("--roc-out", eval_roc, "ROC curve CSV");

    // ablate
    AblateOptions ablate;
    std::vector<std::string> ablate_experts, ablate_features;
    auto* ablate_cmd = app.add_subcommand("ablate", "retrain over expert, support-size and feature subsets");
    ablate_cmd->add_option("--galleries", ablate.galleries, "gallery directory")->required();
    ablate_cmd->add_option("--train", ablate.train_queries, "training query files")->required();
    ablate_cmd->add_option("--eval", ablate.eval_queries, "evaluation query files")->required();
    ablate_cmd->add_option("--k", ablate.k, "support size for expert and feature rows")->capture_default_str();
    ablate_cmd->add_option("--support-sizes", ablate.support_sizes, "K values")->delimiter(',')->capture_default_str();
    ablate_cmd->add_option("--expert-subset", ablate_experts, "expert subset, e.g. 0,1 (repeatable)");
    ablate_cmd->add_option("--features", ablate_features, "feature subset, e.g. qs,ce (repeatable)");
    add_sgd_options(ablate_cmd, ablate.sgd);
    ablate_cmd->add_option("--out", ablate.out, "ablation CSV")->required();

    // stats
    StatsOptions stats;
    auto* stats_cmd = app.add_subcommand("stats", "per-query relation statistics");
    stats_cmd->add_option("--galleries", stats.galleries, "gallery directory")->required();
    stats_cmd->add_option("--queries", stats.queries, "query files")->required();
    stats_cmd->add_option("--k", stats.k, "support size")->capture_default_str();
    stats_cmd->add_option("--out", stats.out, "stats CSV")->required();

    // pipeline
    PipelineOptions pipe;
    pipe.scenario.eval_queries_per_identity = 10;
    std::uint64_t pipe_seed = 7;
    auto* pipe_cmd = app.add_subcommand("pipeline", "gen, naive attack, featurize, train and eval in one go");
    pipe_cmd->add_option("--seed", pipe_seed, "seed for every stage")->envname("MEAAD_SEED")->capture_default_str();
    pipe_cmd->add_option("--identities", pipe.scenario.n_identities)->capture_default_str();
    pipe_cmd->add_option("--per-id", pipe.scenario.items_per_identity)->capture_default_str();
    pipe_cmd->add_option("--experts", pipe.scenario.n_experts)->capture_default_str();
    pipe_cmd->add_option("--dim", pipe.scenario.dimension)->capture_default_str();
    pipe_cmd->add_option("--queries-per-id,--queries-per-identity", pipe.scenario.queries_per_identity)
        ->capture_default_str();
    pipe_cmd->add_option("--eval-queries-per-id", pipe.scenario.eval_queries_per_identity)->capture_default_str();
    pipe_cmd->add_option("--epsilon", pipe.attack.epsilon)->capture_default_str();
    pipe_cmd->add_option("--k", pipe.k, "support size")->capture_default_str();
    pipe_cmd->add_option("--iterations", pipe.sgd.iterations)->capture_default_str();
    pipe_cmd->add_option("--out", pipe.out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*gen_cmd) {
            const GenOutputs out = cmd_gen(gen);
            std::cout << "wrote " << out.galleries.size() << " galleries and " << out.queries.string() << '\n';
        } else if (*attack_cmd) {
            resolve_attack(attack.attack, attack_kind, attack_target);
            if (!attack_model.empty()) attack.model = attack_model;
            if (!attack_report.empty()) attack.report = attack_report;
            const AttackSummary s = cmd_attack(attack);
            std::cout << "kind=" << to_string(s.kind) << " queries=" << s.queries;
            if (s.kind == AttackKind::Targeted) std::cout << " successes=" << s.successes;
            std::cout << " mean_displacement=" << format_real(s.mean_displacement) << '\n';
        } else if (*feat_cmd) {
            if (!feat_experts.empty()) feat.experts = parse_index_list(feat_experts);
            const FeatureDataset ds = cmd_featurize(feat);
            std::cout << "n=" << ds.layout.n_experts << " k=" << ds.layout.support_size << " d=" << ds.dimension()
                      << " examples=" << ds.examples.size() << '\n';
        } else if (*train_cmd) {
            if (!train_loss.empty()) train.loss_csv = train_loss;
            const TrainedDetector t = cmd_train(train);
            std::cout << "initial_loss=" << format_real(t.initial_loss) << " final_loss=" << format_real(t.final_loss)
                      << '\n';
        } else if (*eval_cmd) {
            eval.detector = eval_detector == "voting" ? DetectorKind::Voting : DetectorKind::Mlp;
            if (eval.detector == DetectorKind::Mlp && (eval.features.empty() || eval.model.empty())) {
                throw Error(ErrorCode::InvalidConfig, "--detector mlp needs --features and --model");
            }
            if (eval.detector == DetectorKind::Voting && (eval.galleries.empty() || eval.queries.empty())) {
                throw Error(ErrorCode::InvalidConfig, "--detector voting needs --galleries and --queries");
            }
            if (!eval_out.empty()) eval.out = eval_out;
            if (!eval_roc.empty()) eval.roc_out = eval_roc;
            const EvalResult r = cmd_eval(eval);
            for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
            print_report(eval_detector, r.report);
        } else if (*ablate_cmd) {
            for (const auto& s : ablate_experts) ablate.expert_subsets.push_back(parse_index_list(s));
            for (const auto& f : ablate_features) ablate.feature_subsets.push_back(FeatureBlocks::parse(f));
            const auto rows = cmd_ablate(ablate);
            std::cout << "wrote " << rows.size() << " rows to " << ablate.out.string() << '\n';
        } else if (*stats_cmd) {
            cmd_stats(stats);
        } else if (*pipe_cmd) {
            pipe.scenario.seed = pipe_seed;
            pipe.attack.seed = pipe_seed;
            pipe.sgd.seed = pipe_seed;
            const PipelineResult r = run_pipeline(pipe);
            print_report("mlp", r.mlp);
            write_metrics_row(std::cout, "voting", r.voting);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(ErrorCode::Io);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(ErrorCode::Io);
    }
    return 0;
}
