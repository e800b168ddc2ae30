#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>

#include "pprtrack/event_stream.hpp"
#include "pprtrack/injection.hpp"
#include "pprtrack/pipeline.hpp"

using namespace pprtrack;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() /
               ("pprtrack_test_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

fs::path write_file(const fs::path& dir, const std::string& name,
                    const std::string& body) {
    fs::path p = dir / name;
    std::ofstream out(p, std::ios::binary);
    out << body;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Deterministic random background stream in external-id form.
std::string synth_stream(int n, Snapshot snapshots, int events_per_snapshot,
                         unsigned seed) {
    std::mt19937 rng(seed);
    std::ostringstream os;
    for (int i = 0; i < 3 * n; ++i) {
        int u = rng() % n, v = rng() % n;
        if (u == v) continue;
        os << 0 << "\tn" << u << "\tn" << v << "\t1\n";
    }
    for (Snapshot t = 1; t <= snapshots; ++t) {
        for (int i = 0; i < events_per_snapshot; ++i) {
            int u = rng() % n, v = rng() % n;
            if (u == v) continue;
            os << t << "\tn" << u << "\tn" << v << "\t1\n";
        }
    }
    return os.str();
}

} // namespace

TEST_CASE("run: snapshot-0-only stream gives empty score files and a manifest") {
    TempDir tmp("t0");
    auto stream = write_file(tmp.path, "s.tsv", "0\ta\tb\t1\n0\tb\ta\t1\n");
    RunConfig cfg;
    cfg.mode = RunMode::both;
    cfg.tracked = {"a"};
    cfg.epsilon = 1e-8;
    auto result = run_pipeline(cfg, stream.string(), tmp.path / "out");
    CHECK(result.node_score_rows == 0);
    CHECK(result.graph_score_rows == 0);
    CHECK(slurp(result.node_scores_path) == "node,snapshot,score\n");
    CHECK(slurp(result.graph_scores_path) == "snapshot,score\n");
    CHECK(result.manifest["counts"]["snapshots"] == 0);
    CHECK(result.manifest["config"]["representation_mode"] == "raw");
}

TEST_CASE("run: one tracked node over three snapshots yields three rows") {
    TempDir tmp("t3");
    auto stream = write_file(tmp.path, "s.tsv",
                             "0\ta\tb\t1\n"
                             "1\tb\tc\t1\n"
                             "2\tc\ta\t1\n"
                             "3\ta\tc\t2\n");
    RunConfig cfg;
    cfg.tracked = {"a"};
    cfg.epsilon = 1e-8;
    auto result = run_pipeline(cfg, stream.string(), tmp.path / "out");
    CHECK(result.node_score_rows == 3);
    auto rows = read_node_scores(result.node_scores_path);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].node == "a");
    CHECK(rows[0].snapshot == 1);
    CHECK(rows[2].snapshot == 3);
}

TEST_CASE("run: reruns are byte-identical apart from timings") {
    TempDir tmp("det");
    auto stream = write_file(tmp.path, "s.tsv", synth_stream(30, 8, 10, 5));
    RunConfig cfg;
    cfg.mode = RunMode::both;
    cfg.tracked = {"n1", "n5", "n7"};
    cfg.epsilon = 1e-7;
    cfg.graph_topk = 5;
    auto a = run_pipeline(cfg, stream.string(), tmp.path / "a");
    auto b = run_pipeline(cfg, stream.string(), tmp.path / "b");
    CHECK(slurp(a.node_scores_path) == slurp(b.node_scores_path));
    CHECK(slurp(a.graph_scores_path) == slurp(b.graph_scores_path));
    auto ma = a.manifest;
    auto mb = b.manifest;
    ma.erase("timings");
    mb.erase("timings");
    CHECK(ma == mb);
}

TEST_CASE("run: node scores are gated by init_snapshot") {
    TempDir tmp("init");
    auto stream = write_file(tmp.path, "s.tsv", synth_stream(20, 10, 6, 9));
    RunConfig cfg;
    cfg.tracked = {"n2"};
    cfg.epsilon = 1e-7;
    cfg.init_snapshot = 4;
    auto result = run_pipeline(cfg, stream.string(), tmp.path / "out");
    auto rows = read_node_scores(result.node_scores_path);
    REQUIRE(rows.size() == 6);
    CHECK(rows.front().snapshot == 5);
    CHECK(rows.back().snapshot == 10);
}

TEST_CASE("run: undirected flag doubles the effective event count") {
    TempDir tmp("undir");
    auto stream = write_file(tmp.path, "s.tsv", "0\ta\tb\t1\n1\tb\tc\t1\n");
    RunConfig cfg;
    cfg.tracked = {"a"};
    auto directed = run_pipeline(cfg, stream.string(), tmp.path / "d");
    cfg.undirected = true;
    auto mirrored = run_pipeline(cfg, stream.string(), tmp.path / "u");
    CHECK(directed.manifest["counts"]["events"] == 2);
    CHECK(mirrored.manifest["counts"]["events"] == 4);
}

TEST_CASE("run: graph mode emits one row per scored snapshot") {
    TempDir tmp("gmode");
    auto stream = write_file(tmp.path, "s.tsv", synth_stream(25, 6, 8, 13));
    RunConfig cfg;
    cfg.mode = RunMode::graph;
    cfg.epsilon = 1e-7;
    cfg.graph_topk = 10;
    auto result = run_pipeline(cfg, stream.string(), tmp.path / "out");
    auto rows = read_graph_scores(result.graph_scores_path);
    REQUIRE(rows.size() == 6);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].first == static_cast<Snapshot>(i + 1));
        CHECK(rows[i].second >= 0.0);
    }
    CHECK(result.manifest["counts"]["graph_tracked_members"].get<std::size_t>() >= 10);
}

TEST_CASE("run: node mode requires a tracked set") {
    TempDir tmp("notrack");
    auto stream = write_file(tmp.path, "s.tsv", "0\ta\tb\t1\n");
    RunConfig cfg;
    CHECK_THROWS_AS(run_pipeline(cfg, stream.string(), tmp.path / "out"), Error);
}

TEST_CASE("run: representation dump is written on request") {
    TempDir tmp("reps");
    auto stream = write_file(tmp.path, "s.tsv", "0\ta\tb\t1\n1\tb\ta\t1\n");
    RunConfig cfg;
    cfg.tracked = {"a"};
    cfg.dump_representations = true;
    run_pipeline(cfg, stream.string(), tmp.path / "out");
    auto body = slurp(tmp.path / "out" / "representations.csv");
    CHECK(body.find("source,snapshot,mode,values") == 0);
    CHECK(body.find("a,0,raw,") != std::string::npos);
}

TEST_CASE("run: manifest records every effective parameter") {
    TempDir tmp("manifest");
    auto stream = write_file(tmp.path, "s.tsv", synth_stream(12, 2, 4, 21));
    RunConfig cfg;
    cfg.tracked = {"n3"};
    cfg.epsilon = 1e-13; // below the floor
    auto result = run_pipeline(cfg, stream.string(), tmp.path / "out");
    const auto& m = result.manifest;
    CHECK(m["config"]["epsilon_effective"] == 1e-12);
    CHECK(m["config"]["epsilon_c"].get<double>() > 0.0);
    CHECK(m["config"]["representation_mode"] == "raw");
    CHECK(m["config"]["seed_bucket"].get<std::uint32_t>() != 0);
    CHECK(m["counts"]["tracked_nodes"] == 1);
    CHECK(m["timings"].contains("track_seconds"));
}

TEST_CASE("check: clean stream passes, corrupted tracker is flagged") {
    TempDir tmp("check");
    auto stream = write_file(tmp.path, "s.tsv", synth_stream(25, 6, 8, 31));
    CheckConfig cfg;
    cfg.epsilon = 1e-6;
    auto report = run_check(cfg, stream.string());
    CHECK(report.ok());
    CHECK(report.max_lemma_residual <= 1e-8);
    CHECK(report.max_oracle_gap <= report.oracle_bound);
    CHECK(report.max_dynamic_static_gap <= report.dynamic_static_bound);
    CHECK(report.snapshots_checked == 6);

    cfg.corrupt_tracker = true;
    auto bad = run_check(cfg, stream.string());
    CHECK_FALSE(bad.ok());
}

TEST_CASE("check: empty stream is a vacuous pass") {
    TempDir tmp("checkempty");
    auto stream = write_file(tmp.path, "s.tsv", "# nothing\n");
    CheckConfig cfg;
    auto report = run_check(cfg, stream.string());
    CHECK(report.ok());
    CHECK(report.sources_checked == 0);
}

TEST_CASE("check: oracle cap is enforced") {
    TempDir tmp("cap");
    std::ostringstream os;
    for (int i = 0; i < 40; ++i) os << "0\tn" << i << "\tn" << (i + 1) % 40 << "\t1\n";
    auto stream = write_file(tmp.path, "s.tsv", os.str());
    CheckConfig cfg;
    cfg.oracle_cap = 10;
    CHECK_THROWS_AS(run_check(cfg, stream.string()), CapExceededError);
}

TEST_CASE("inject then eval with truth-as-scores is a perfect round trip") {
    auto parsed_stream = [] {
        std::istringstream in(synth_stream(30, 12, 6, 77));
        return read_event_stream(in);
    }();
    InjectionPlan plan;
    plan.kind = InjectionKind::star;
    plan.snapshots = {4, 9};
    plan.targets_per_star = 5;
    plan.edges_per_injection = 20;
    auto injected = inject_star(parsed_stream.events, plan);

    std::vector<ScoreRecord> oracle_scores;
    for (const auto& [node, snaps] : injected.truth.labels) {
        for (Snapshot t = 1; t <= 12; ++t) {
            oracle_scores.push_back(
                ScoreRecord{node, t, snaps.count(t) ? 1.0 : 0.0});
        }
    }
    CHECK(precision_avg(oracle_scores, injected.truth) == doctest::Approx(1.0));
}

TEST_CASE("random baseline over 90 scored snapshots lands in the expected band") {
    // One label per node, 115 snapshots with the first 25 as warmup leaves 90
    // candidate snapshots; expected precision is 1/90.
    const Snapshot first = 26, last = 115;
    const int nodes_per_trial = 200, trials = 100;
    double total = 0.0;
    std::mt19937 label_rng(3);
    for (int trial = 0; trial < trials; ++trial) {
        GroundTruth truth;
        std::vector<NodeId> nodes;
        for (int u = 0; u < nodes_per_trial; ++u) {
            nodes.push_back(static_cast<NodeId>(u));
            truth.labels[static_cast<NodeId>(u)] = {
                first + static_cast<Snapshot>(label_rng() % (last - first + 1))};
        }
        auto scores = random_baseline(nodes, first, last, 1000 + trial);
        total += precision_avg(scores, truth);
    }
    const double mean = total / trials;
    CHECK(mean >= 0.009);
    CHECK(mean <= 0.014);
}

TEST_CASE("score csv round trips preserve rows and ordering") {
    TempDir tmp("csv");
    std::vector<NodeScoreRow> rows{
        {"b", 2, 0.5}, {"a", 2, 1.0 / 3.0}, {"a", 1, 0.125}};
    auto path = tmp.path / "node.csv";
    write_node_scores(path, rows);
    auto back = read_node_scores(path);
    REQUIRE(back.size() == 3);
    CHECK(back[0].node == "a");
    CHECK(back[0].snapshot == 1);
    CHECK(back[1].node == "a");
    CHECK(back[1].snapshot == 2);
    CHECK(back[1].score == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(back[2].node == "b");

    auto gpath = tmp.path / "graph.csv";
    write_graph_scores(gpath, {{1, 0.25}, {2, 0.75}});
    auto grows = read_graph_scores(gpath);
    REQUIRE(grows.size() == 2);
    CHECK(grows[1].second == 0.75);
}
