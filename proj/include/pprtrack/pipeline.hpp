#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pprtrack/types.hpp"

namespace pprtrack {

enum class RunMode { node, graph, both };

struct RunConfig {
    double alpha = 0.15;
    double epsilon = 1e-12;                 // floored at kMinEpsilon when used
    std::optional<double> epsilon_c;        // auto: min(1/|V|, 1e-5)
    std::uint32_t dim = 1024;
    int p_norm = 1;
    RunMode mode = RunMode::node;
    std::size_t graph_topk = 100;
    bool undirected = false;
    bool force_hashed = false;
    bool log_floor = true;
    std::uint32_t seed_bucket = 0x9e3779b9u;
    std::uint32_t seed_sign = 0x85ebca6bu;
    std::uint64_t seed_rng = 1;
    Snapshot init_snapshot = 0;             // score rows start at init_snapshot + 1
    std::vector<std::string> tracked;       // external ids; required in node mode
    bool dump_representations = false;
};

struct RunResult {
    nlohmann::json manifest;
    std::filesystem::path manifest_path;
    std::filesystem::path node_scores_path;   // empty if mode == graph
    std::filesystem::path graph_scores_path;  // empty if mode == node
    std::size_t node_score_rows = 0;
    std::size_t graph_score_rows = 0;
};

// Full pipeline: ingest the stream, build the initial graph from snapshot-0
// events, track PPVs incrementally across snapshots 1..T, convert them to
// representations and scores, and write score CSVs plus a manifest.
// Deterministic: identical config + stream give byte-identical outputs
// except the manifest's "timings" object.
RunResult run_pipeline(const RunConfig& config, const std::string& stream_path,
                       const std::filesystem::path& out_dir);

struct CheckConfig {
    double alpha = 0.15;
    double epsilon = 1e-6;
    std::size_t oracle_cap = 2000;
    bool undirected = false;
    std::vector<std::string> nodes;   // sources to audit; sampled when empty
    bool corrupt_tracker = false;     // test hook: perturb one residual
};

struct CheckReport {
    double max_lemma_residual = 0.0;
    double lemma_tolerance = 1e-8;
    double max_oracle_gap = 0.0;
    double oracle_bound = 0.0;      // eps * vol(G_T) + 1e-6
    double max_dynamic_static_gap = 0.0;
    double dynamic_static_bound = 0.0; // 2 * eps * vol(G_T)
    std::size_t sources_checked = 0;
    std::size_t snapshots_checked = 0;

    bool ok() const {
        return max_lemma_residual <= lemma_tolerance &&
               max_oracle_gap <= oracle_bound &&
               max_dynamic_static_gap <= dynamic_static_bound;
    }
};

// Replays the stream with audited trackers: evaluates the degree-balance
// equation after every batch, and compares final estimates against the dense
// oracle and against a from-scratch push on the final graph. Throws
// CapExceededError when the graph exceeds oracle_cap nodes.
CheckReport run_check(const CheckConfig& config, const std::string& stream_path);

// Score CSV round-trip used by run/eval. Rows carry external node names.
struct NodeScoreRow {
    std::string node;
    Snapshot snapshot = 0;
    double score = 0.0;
};

void write_node_scores(const std::filesystem::path& path,
                       std::vector<NodeScoreRow> rows);
std::vector<NodeScoreRow> read_node_scores(const std::filesystem::path& path);

void write_graph_scores(const std::filesystem::path& path,
                        const std::vector<std::pair<Snapshot, double>>& rows);
std::vector<std::pair<Snapshot, double>> read_graph_scores(
    const std::filesystem::path& path);

// Shortest round-trip decimal form; all numeric output goes through this so
// reruns are byte-identical.
std::string format_double(double v);

} // namespace pprtrack
