#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pprtrack/event_stream.hpp"
#include "pprtrack/injection.hpp"
#include "pprtrack/pipeline.hpp"
#include "pprtrack/rng.hpp"

namespace {

using nlohmann::json;
using namespace pprtrack;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInvariant = 3;

// Config file values fill in any option the command line left untouched.
// Keys mirror the long flag names (without the leading dashes).
void apply_config_file(CLI::App& cmd, const std::string& path, RunConfig& cfg,
                       std::string& mode, double& epsilon_c,
                       std::string& nodes_file, std::vector<std::string>& track) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config '" + path + "'");
    json j = json::parse(in);

    auto untouched = [&](const char* flag) {
        CLI::Option* opt = cmd.get_option_no_throw(flag);
        return opt == nullptr || opt->count() == 0;
    };
    auto take = [&](const char* key, const char* flag, auto& target) {
        if (j.contains(key) && untouched(flag)) {
            j.at(key).get_to(target);
        }
        j.erase(key);
    };

    take("alpha", "--alpha", cfg.alpha);
    take("epsilon", "--epsilon", cfg.epsilon);
    take("epsilon-c", "--epsilon-c", epsilon_c);
    take("dim", "--dim", cfg.dim);
    take("p-norm", "--p-norm", cfg.p_norm);
    take("mode", "--mode", mode);
    take("graph-topk", "--graph-topk", cfg.graph_topk);
    take("undirected", "--undirected", cfg.undirected);
    take("force-hashed", "--force-hashed", cfg.force_hashed);
    take("log-floor", "--no-log-floor", cfg.log_floor);
    take("seed-bucket", "--seed-bucket", cfg.seed_bucket);
    take("seed-sign", "--seed-sign", cfg.seed_sign);
    take("seed-rng", "--seed-rng", cfg.seed_rng);
    take("init-snapshot", "--init-snapshot", cfg.init_snapshot);
    take("nodes", "--nodes", nodes_file);
    take("track", "--track", track);
    take("dump-reps", "--dump-reps", cfg.dump_representations);
    if (!j.empty()) {
        throw Error("unknown config key '" + j.begin().key() + "'");
    }
}

std::vector<std::string> load_tracked(const std::string& nodes_file,
                                      const std::vector<std::string>& inline_ids) {
    std::vector<std::string> tracked = inline_ids;
    if (!nodes_file.empty()) {
        for (auto& name : read_node_list_file(nodes_file)) {
            tracked.push_back(std::move(name));
        }
    }
    return tracked;
}

void write_json(const std::string& path, const json& value) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << value.dump(2) << '\n';
}

int cmd_run(const RunConfig& config, const std::string& stream,
            const std::string& out_dir) {
    RunResult result = run_pipeline(config, stream, out_dir);
    std::cout << "wrote " << result.manifest_path.string() << " ("
              << result.node_score_rows << " node rows, " << result.graph_score_rows
              << " graph rows)\n";
    return kExitOk;
}

int cmd_check(const CheckConfig& config, const std::string& stream) {
    CheckReport report = run_check(config, stream);
    std::cout << "sources checked:        " << report.sources_checked << '\n'
              << "snapshots checked:      " << report.snapshots_checked << '\n'
              << "max balance residual:   " << format_double(report.max_lemma_residual)
              << " (tolerance " << format_double(report.lemma_tolerance) << ")\n"
              << "max oracle l1 gap:      " << format_double(report.max_oracle_gap)
              << " (bound " << format_double(report.oracle_bound) << ")\n"
              << "dynamic vs static gap:  "
              << format_double(report.max_dynamic_static_gap) << " (bound "
              << format_double(report.dynamic_static_bound) << ")\n"
              << (report.ok() ? "OK" : "VIOLATION") << '\n';
    return report.ok() ? kExitOk : kExitInvariant;
}

int cmd_inject(const std::string& stream_path, const std::string& kind,
               InjectionPlan plan, std::size_t num_snapshots, Snapshot after,
               const std::string& out_stream, const std::string& out_truth) {
    ParsedStream stream = read_event_stream_file(stream_path);
    plan.kind = kind == "star" ? InjectionKind::star : InjectionKind::link;
    if (plan.snapshots.empty() && num_snapshots > 0) {
        Rng rng(plan.rng_seed);
        plan.snapshots = choose_injection_snapshots(after + 1, stream.max_snapshot,
                                                    num_snapshots, rng);
    }
    InjectionResult result = plan.kind == InjectionKind::star
                                 ? inject_star(stream.events, plan)
                                 : inject_link(stream.events, plan);
    {
        std::ofstream out(out_stream, std::ios::binary);
        if (!out) throw Error("cannot write '" + out_stream + "'");
        write_event_stream(out, result.events, stream.nodes);
    }
    {
        std::ofstream out(out_truth, std::ios::binary);
        if (!out) throw Error("cannot write '" + out_truth + "'");
        write_ground_truth(out, result.truth, stream.nodes);
    }
    std::cout << "injected " << (result.events.size() - stream.events.size())
              << " events over " << plan.snapshots.size() << " snapshots; "
              << result.truth.labels.size() << " labeled nodes\n";
    return kExitOk;
}

int cmd_eval_node(const std::string& scores_path, const std::string& truth_path,
                  const std::string& out_path) {
    NodeTable table;
    std::vector<ScoreRecord> records;
    for (const NodeScoreRow& row : read_node_scores(scores_path)) {
        records.push_back(ScoreRecord{table.intern(row.node), row.snapshot, row.score});
    }
    std::ifstream truth_in(truth_path);
    if (!truth_in) throw Error("cannot open '" + truth_path + "'");
    GroundTruth truth = read_ground_truth(truth_in, table);

    json metrics;
    metrics["precision_avg"] = precision_avg(records, truth);
    metrics["labeled_nodes"] = truth.labels.size();
    if (!out_path.empty()) write_json(out_path, metrics);
    std::cout << metrics.dump(2) << '\n';
    return kExitOk;
}

int cmd_eval_graph(const std::string& scores_path, const std::string& truth_path,
                   std::size_t k, std::vector<std::size_t> sweep,
                   const std::string& out_path) {
    auto scores = read_graph_scores(scores_path);
    NodeTable table;
    std::ifstream truth_in(truth_path);
    if (!truth_in) throw Error("cannot open '" + truth_path + "'");
    GroundTruth truth = read_ground_truth(truth_in, table);
    const auto truth_snapshots = truth.snapshots();

    if (k == 0) k = truth_snapshots.size();
    if (sweep.empty()) {
        for (std::size_t i = 50; i <= 800; i += 50) sweep.push_back(i);
    }

    json metrics;
    metrics["k"] = k;
    metrics["precision_at_k"] = precision_at_k(scores, truth_snapshots, k);
    json pr = json::array();
    for (const PrPoint& pt : precision_recall_sweep(scores, truth_snapshots, sweep)) {
        pr.push_back({{"k", pt.k}, {"precision", pt.precision}, {"recall", pt.recall}});
    }
    metrics["pr_sweep"] = pr;
    if (!out_path.empty()) write_json(out_path, metrics);
    std::cout << metrics.dump(2) << '\n';
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Streaming personalized PageRank tracking and anomaly scoring"};
    app.require_subcommand(1);

    // --- run ---
    RunConfig run_config;
    std::string run_stream, run_out, run_nodes_file, run_config_file, run_mode = "node";
    std::vector<std::string> run_track;
    double run_epsilon_c = -1.0;
    auto* run = app.add_subcommand("run", "Track a stream and emit score CSVs");
    run->add_option("--stream", run_stream, "Event stream file")->required();
    run->add_option("--out", run_out, "Output directory")->required();
    run->add_option("--config", run_config_file, "JSON config file; flags override");
    run->add_option("--alpha", run_config.alpha, "Teleport probability");
    run->add_option("--epsilon", run_config.epsilon, "Push threshold (floor 1e-12)");
    run->add_option("--epsilon-c", run_epsilon_c,
                    "Sparsification threshold; negative = auto min(1/|V|,1e-5)");
    run->add_option("--dim", run_config.dim, "Sketch dimension");
    run->add_option("--p-norm", run_config.p_norm, "Score norm, 1 or 2");
    run->add_option("--mode", run_mode, "node, graph, or both");
    run->add_option("--graph-topk", run_config.graph_topk,
                    "High-degree nodes adopted per snapshot");
    run->add_flag("--undirected", run_config.undirected, "Mirror every event");
    run->add_flag("--force-hashed", run_config.force_hashed,
                  "Hash even when ids fit in dim");
    run->add_flag("!--no-log-floor", run_config.log_floor,
                  "Disable clamping log(x) at log(epsilon_c)");
    run->add_option("--seed-bucket", run_config.seed_bucket, "Bucket hash seed");
    run->add_option("--seed-sign", run_config.seed_sign, "Sign hash seed");
    run->add_option("--seed-rng", run_config.seed_rng, "Sampling seed");
    run->add_option("--init-snapshot", run_config.init_snapshot,
                    "Scores start after this snapshot");
    run->add_option("--nodes", run_nodes_file, "Tracked-nodes file");
    run->add_option("--track", run_track, "Tracked node id (repeatable)");
    run->add_flag("--dump-reps", run_config.dump_representations,
                  "Also write representations.csv");

    // --- check ---
    CheckConfig check_config;
    std::string check_stream, check_nodes_file;
    std::vector<std::string> check_track;
    auto* check = app.add_subcommand("check", "Replay a stream and audit invariants");
    check->add_option("--stream", check_stream, "Event stream file")->required();
    check->add_option("--alpha", check_config.alpha, "Teleport probability");
    check->add_option("--epsilon", check_config.epsilon, "Push threshold");
    check->add_option("--cap", check_config.oracle_cap, "Node cap for the dense oracle");
    check->add_flag("--undirected", check_config.undirected, "Mirror every event");
    check->add_option("--nodes", check_nodes_file, "Sources file (default: sampled)");
    check->add_option("--track", check_track, "Source id (repeatable)");
    check->add_flag("--corrupt-tracker", check_config.corrupt_tracker,
                    "Test hook: perturb one tracker before auditing");

    // --- inject ---
    InjectionPlan plan;
    std::string inject_stream, inject_kind = "star", inject_out_stream, inject_out_truth;
    std::size_t inject_num_snapshots = 20;
    Snapshot inject_after = 0;
    auto* inject = app.add_subcommand("inject", "Add synthetic anomalies to a stream");
    inject->add_option("--stream", inject_stream, "Event stream file")->required();
    inject->add_option("--kind", inject_kind, "star or link")
        ->check(CLI::IsMember({"star", "link"}));
    inject->add_option("--snapshots", plan.snapshots,
                       "Explicit snapshot ids (default: sampled)");
    inject->add_option("--num-snapshots", inject_num_snapshots,
                       "Snapshots to sample when --snapshots is absent");
    inject->add_option("--after", inject_after, "Sample snapshots strictly after this");
    inject->add_option("--edges", plan.edges_per_injection, "Events per injection");
    inject->add_option("--targets", plan.targets_per_star, "Targets per star");
    inject->add_option("--pairs", plan.pairs_per_link, "Pairs per link injection");
    inject->add_option("--quantile", plan.high_degree_quantile,
                       "High-degree quantile for star hubs");
    inject->add_option("--seed", plan.rng_seed, "Sampling seed");
    inject->add_option("--out-stream", inject_out_stream, "Injected stream file")
        ->required();
    inject->add_option("--out-truth", inject_out_truth, "Ground truth file")->required();

    // --- eval ---
    auto* eval = app.add_subcommand("eval", "Score detection quality against truth");
    eval->require_subcommand(1);
    std::string eval_scores, eval_truth, eval_out;
    auto* eval_node = eval->add_subcommand("node", "Averaged per-node precision");
    eval_node->add_option("--scores", eval_scores, "node_scores.csv")->required();
    eval_node->add_option("--truth", eval_truth, "Ground truth file")->required();
    eval_node->add_option("--out", eval_out, "Metrics JSON path");
    std::size_t eval_k = 0;
    std::vector<std::size_t> eval_sweep;
    auto* eval_graph = eval->add_subcommand("graph", "Precision at top-k snapshots");
    eval_graph->add_option("--scores", eval_scores, "graph_scores.csv")->required();
    eval_graph->add_option("--truth", eval_truth, "Ground truth file")->required();
    eval_graph->add_option("--k", eval_k, "k (default: number of truth snapshots)");
    eval_graph->add_option("--sweep", eval_sweep, "k values for the PR sweep");
    eval_graph->add_option("--out", eval_out, "Metrics JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (run->parsed()) {
            if (!run_config_file.empty()) {
                apply_config_file(*run, run_config_file, run_config, run_mode,
                                  run_epsilon_c, run_nodes_file, run_track);
            }
            if (run_mode == "node") run_config.mode = RunMode::node;
            else if (run_mode == "graph") run_config.mode = RunMode::graph;
            else if (run_mode == "both") run_config.mode = RunMode::both;
            else throw Error("mode must be node, graph, or both");
            if (run_epsilon_c >= 0.0) run_config.epsilon_c = run_epsilon_c;
            run_config.tracked = load_tracked(run_nodes_file, run_track);
            return cmd_run(run_config, run_stream, run_out);
        }
        if (check->parsed()) {
            check_config.nodes = load_tracked(check_nodes_file, check_track);
            return cmd_check(check_config, check_stream);
        }
        if (inject->parsed()) {
            return cmd_inject(inject_stream, inject_kind, plan, inject_num_snapshots,
                              inject_after, inject_out_stream, inject_out_truth);
        }
        if (eval_node->parsed()) {
            return cmd_eval_node(eval_scores, eval_truth, eval_out);
        }
        if (eval_graph->parsed()) {
            return cmd_eval_graph(eval_scores, eval_truth, eval_k, eval_sweep, eval_out);
        }
    } catch (const InvariantError& e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
