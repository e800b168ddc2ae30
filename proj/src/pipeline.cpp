#include "pprtrack/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "pprtrack/anomaly.hpp"
#include "pprtrack/embedding.hpp"
#include "pprtrack/event_stream.hpp"
#include "pprtrack/ppr.hpp"

namespace pprtrack {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

const char* mode_name(RunMode m) {
    switch (m) {
        case RunMode::node: return "node";
        case RunMode::graph: return "graph";
        case RunMode::both: return "both";
    }
    return "node";
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write '" + path.string() + "'");
    }
    return out;
}

std::string rep_to_csv_field(const NodeRepresentation& rep) {
    std::ostringstream os;
    bool first = true;
    if (rep.mode == RepMode::raw) {
        for (const auto& [i, v] : rep.sparse.sorted_entries()) {
            if (!first) os << ';';
            os << i << ':' << format_double(v);
            first = false;
        }
    } else {
        for (std::size_t i = 0; i < rep.dense.size(); ++i) {
            if (rep.dense[i] == 0.0) continue;
            if (!first) os << ';';
            os << i << ':' << format_double(rep.dense[i]);
            first = false;
        }
    }
    return os.str();
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_node_scores(const std::filesystem::path& path,
                       std::vector<NodeScoreRow> rows) {
    std::sort(rows.begin(), rows.end(), [](const NodeScoreRow& a, const NodeScoreRow& b) {
        if (a.node != b.node) return a.node < b.node;
        return a.snapshot < b.snapshot;
    });
    auto out = open_out(path);
    out << "node,snapshot,score\n";
    for (const NodeScoreRow& r : rows) {
        out << r.node << ',' << r.snapshot << ',' << format_double(r.score) << '\n';
    }
}

std::vector<NodeScoreRow> read_node_scores(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::vector<NodeScoreRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line == "node,snapshot,score") continue;
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = line.find(',', c1 == std::string::npos ? 0 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            throw ParseError(line_no, "expected node,snapshot,score");
        }
        NodeScoreRow row;
        row.node = line.substr(0, c1);
        try {
            row.snapshot = std::stoll(line.substr(c1 + 1, c2 - c1 - 1));
            row.score = std::stod(line.substr(c2 + 1));
        } catch (const std::exception&) {
            throw ParseError(line_no, "bad numeric field");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_graph_scores(const std::filesystem::path& path,
                        const std::vector<std::pair<Snapshot, double>>& rows) {
    auto out = open_out(path);
    out << "snapshot,score\n";
    for (const auto& [t, score] : rows) {
        out << t << ',' << format_double(score) << '\n';
    }
}

std::vector<std::pair<Snapshot, double>> read_graph_scores(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::vector<std::pair<Snapshot, double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line == "snapshot,score") continue;
        const std::size_t c = line.find(',');
        if (c == std::string::npos) {
            throw ParseError(line_no, "expected snapshot,score");
        }
        try {
            rows.emplace_back(std::stoll(line.substr(0, c)),
                              std::stod(line.substr(c + 1)));
        } catch (const std::exception&) {
            throw ParseError(line_no, "bad numeric field");
        }
    }
    return rows;
}

RunResult run_pipeline(const RunConfig& config, const std::string& stream_path,
                       const std::filesystem::path& out_dir) {
    const auto t_total = Clock::now();
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
        throw Error("alpha must be in (0,1)");
    }
    if (config.dim < 1) throw Error("dim must be >= 1");
    if (config.p_norm != 1 && config.p_norm != 2) throw Error("p_norm must be 1 or 2");

    const bool want_node = config.mode != RunMode::graph;
    const bool want_graph = config.mode != RunMode::node;

    std::filesystem::create_directories(out_dir);

    // --- ingest ---
    const auto t_ingest = Clock::now();
    ParsedStream stream = read_event_stream_file(stream_path);
    if (config.undirected) {
        stream.events = mirror_stream(stream.events);
    }

    // Tracked ids join the ambient id space even if the stream never
    // mentions them.
    std::vector<NodeId> tracked_ids;
    if (want_node) {
        if (config.tracked.empty()) {
            throw Error("node mode requires a non-empty tracked set");
        }
        for (const std::string& name : config.tracked) {
            tracked_ids.push_back(stream.nodes.intern(name));
        }
        std::sort(tracked_ids.begin(), tracked_ids.end());
        tracked_ids.erase(std::unique(tracked_ids.begin(), tracked_ids.end()),
                          tracked_ids.end());
    }

    const std::size_t ambient_nodes = stream.nodes.size();
    const double epsilon_c =
        config.epsilon_c ? *config.epsilon_c : derived_epsilon_c(ambient_nodes);
    EmbedOptions embed;
    embed.mode = select_mode(ambient_nodes, config.dim, config.force_hashed);
    embed.hash.dim = config.dim;
    embed.hash.seed_bucket = config.seed_bucket;
    embed.hash.seed_sign = config.seed_sign;
    embed.epsilon_c = epsilon_c;
    embed.log_floor = config.log_floor;

    const Snapshot T = stream.max_snapshot;
    const auto initial = initial_build(stream.events);
    const auto batches = snapshot_batches(stream.events, T);
    const double ingest_seconds = seconds_since(t_ingest);

    // --- track / embed / score, one snapshot at a time ---
    double track_seconds = 0.0, embed_seconds = 0.0, score_seconds = 0.0;

    auto t_phase = Clock::now();
    DynamicGraph g;
    for (const EdgeEvent& e : initial) g.apply_event(e);
    if (stream.nodes.size() > 0) {
        g.ensure_node(static_cast<NodeId>(stream.nodes.size() - 1));
    }

    StreamTracker tracker(g, config.alpha, config.epsilon);
    for (NodeId s : tracked_ids) tracker.add_source(s);

    TrackingList tracking_list(config.graph_topk);
    std::unordered_map<NodeId, SparseVec> prev_ppv;
    if (want_graph) {
        tracking_list.update(g);
        for (NodeId s : tracking_list.members()) {
            tracker.add_source(s);
            prev_ppv.emplace(s, tracker.tracker(s).p());
        }
    }
    track_seconds += seconds_since(t_phase);

    t_phase = Clock::now();
    std::unordered_map<NodeId, NodeRepresentation> prev_rep;
    for (NodeId s : tracked_ids) {
        prev_rep.emplace(
            s, reduce_dim(l1_normalized(sparsify(tracker.tracker(s).p(), epsilon_c)),
                          embed));
    }
    embed_seconds += seconds_since(t_phase);

    std::vector<NodeScoreRow> node_rows;
    std::vector<std::pair<Snapshot, double>> graph_rows;
    std::vector<std::tuple<NodeId, Snapshot, std::string>> rep_dump;
    if (config.dump_representations) {
        for (NodeId s : tracked_ids) {
            rep_dump.emplace_back(s, 0, rep_to_csv_field(prev_rep.at(s)));
        }
    }

    for (Snapshot t = 1; t <= T; ++t) {
        t_phase = Clock::now();
        tracker.apply_batch(batches[static_cast<std::size_t>(t - 1)]);
        if (want_graph) {
            tracking_list.update(g);
            for (NodeId s : tracking_list.members()) {
                if (!tracker.has_source(s)) {
                    // A member adopted at t has no earlier estimate; its first
                    // scored change is measured from the next snapshot.
                    tracker.add_source(s);
                    prev_ppv.emplace(s, tracker.tracker(s).p());
                }
            }
        }
        track_seconds += seconds_since(t_phase);

        if (want_node) {
            t_phase = Clock::now();
            std::unordered_map<NodeId, NodeRepresentation> cur_rep;
            for (NodeId s : tracked_ids) {
                cur_rep.emplace(
                    s, reduce_dim(
                           l1_normalized(sparsify(tracker.tracker(s).p(), epsilon_c)),
                           embed));
            }
            embed_seconds += seconds_since(t_phase);

            t_phase = Clock::now();
            for (NodeId s : tracked_ids) {
                if (t > config.init_snapshot) {
                    node_rows.push_back(NodeScoreRow{
                        stream.nodes.name(s), t,
                        node_score(prev_rep.at(s), cur_rep.at(s), config.p_norm)});
                }
                if (config.dump_representations) {
                    rep_dump.emplace_back(s, t, rep_to_csv_field(cur_rep.at(s)));
                }
                prev_rep.at(s) = std::move(cur_rep.at(s));
            }
            score_seconds += seconds_since(t_phase);
        }

        if (want_graph) {
            t_phase = Clock::now();
            std::unordered_map<NodeId, SparseVec> cur_ppv;
            for (NodeId s : tracking_list.members()) {
                cur_ppv.emplace(s, tracker.tracker(s).p());
            }
            if (t > config.init_snapshot) {
                graph_rows.emplace_back(t, graph_score(prev_ppv, cur_ppv, tracking_list));
            }
            prev_ppv = std::move(cur_ppv);
            score_seconds += seconds_since(t_phase);
        }
    }

    // --- write outputs ---
    const auto t_write = Clock::now();
    RunResult result;
    result.manifest_path = out_dir / "manifest.json";
    if (want_node) {
        result.node_scores_path = out_dir / "node_scores.csv";
        result.node_score_rows = node_rows.size();
        write_node_scores(result.node_scores_path, std::move(node_rows));
    }
    if (want_graph) {
        result.graph_scores_path = out_dir / "graph_scores.csv";
        result.graph_score_rows = graph_rows.size();
        write_graph_scores(result.graph_scores_path, graph_rows);
    }
    if (config.dump_representations) {
        auto out = open_out(out_dir / "representations.csv");
        out << "source,snapshot,mode,values\n";
        for (const auto& [s, t, field] : rep_dump) {
            out << stream.nodes.name(s) << ',' << t << ','
                << (embed.mode == RepMode::raw ? "raw" : "hashed") << ',' << field
                << '\n';
        }
    }

    nlohmann::json manifest;
    manifest["config"] = {
        {"alpha", config.alpha},
        {"epsilon", config.epsilon},
        {"epsilon_effective", std::max(config.epsilon, kMinEpsilon)},
        {"epsilon_c", epsilon_c},
        {"dim", config.dim},
        {"p_norm", config.p_norm},
        {"mode", mode_name(config.mode)},
        {"representation_mode", embed.mode == RepMode::raw ? "raw" : "hashed"},
        {"graph_topk", config.graph_topk},
        {"undirected", config.undirected},
        {"log_floor", config.log_floor},
        {"force_hashed", config.force_hashed},
        {"init_snapshot", config.init_snapshot},
        {"seed_bucket", config.seed_bucket},
        {"seed_sign", config.seed_sign},
        {"seed_rng", config.seed_rng},
    };
    manifest["counts"] = {
        {"nodes", ambient_nodes},
        {"events", stream.events.size()},
        {"snapshots", T},
        {"tracked_nodes", tracked_ids.size()},
        {"graph_tracked_members",
         want_graph ? tracking_list.members().size() : std::size_t{0}},
        {"node_score_rows", result.node_score_rows},
        {"graph_score_rows", result.graph_score_rows},
        {"final_volume", g.volume()},
    };
    manifest["outputs"] = {
        {"node_scores", want_node ? "node_scores.csv" : ""},
        {"graph_scores", want_graph ? "graph_scores.csv" : ""},
    };
    const double write_seconds = seconds_since(t_write);
    manifest["timings"] = {
        {"ingest_seconds", ingest_seconds},
        {"track_seconds", track_seconds},
        {"embed_seconds", embed_seconds},
        {"score_seconds", score_seconds},
        {"write_seconds", write_seconds},
        {"total_seconds", seconds_since(t_total)},
    };
    {
        auto out = open_out(result.manifest_path);
        out << manifest.dump(2) << '\n';
    }
    result.manifest = std::move(manifest);
    return result;
}

CheckReport run_check(const CheckConfig& config, const std::string& stream_path) {
    ParsedStream stream = read_event_stream_file(stream_path);
    if (config.undirected) {
        stream.events = mirror_stream(stream.events);
    }
    if (stream.nodes.size() > config.oracle_cap) {
        throw CapExceededError("graph has " + std::to_string(stream.nodes.size()) +
                               " nodes, oracle cap is " +
                               std::to_string(config.oracle_cap));
    }

    std::vector<NodeId> sources;
    if (!config.nodes.empty()) {
        for (const std::string& name : config.nodes) {
            auto id = stream.nodes.find(name);
            if (!id) throw Error("unknown node '" + name + "'");
            sources.push_back(*id);
        }
    } else {
        // Spread a handful of sources over the id space.
        const std::size_t n = stream.nodes.size();
        const std::size_t want = std::min<std::size_t>(5, n);
        for (std::size_t i = 0; i < want; ++i) {
            sources.push_back(static_cast<NodeId>(i * n / want));
        }
        std::sort(sources.begin(), sources.end());
        sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
    }

    CheckReport report;
    DynamicGraph g;
    for (const EdgeEvent& e : initial_build(stream.events)) g.apply_event(e);
    if (stream.nodes.size() > 0) {
        g.ensure_node(static_cast<NodeId>(stream.nodes.size() - 1));
    }

    StreamTracker tracker(g, config.alpha, config.epsilon);
    for (NodeId s : sources) tracker.add_source(s);
    report.sources_checked = sources.size();

    if (config.corrupt_tracker && !sources.empty()) {
        tracker.tracker_mut(sources.front()).r_mut().add(sources.front(), 0.125);
    }

    auto audit_lemma = [&]() {
        for (NodeId s : sources) {
            report.max_lemma_residual = std::max(
                report.max_lemma_residual,
                max_invariant_residual(tracker.tracker(s), g));
        }
    };
    audit_lemma();

    const auto batches = snapshot_batches(stream.events, stream.max_snapshot);
    for (const auto& batch : batches) {
        tracker.apply_batch(batch);
        audit_lemma();
        ++report.snapshots_checked;
    }

    const double eps_eff = std::max(config.epsilon, kMinEpsilon);
    const double vol = g.volume();
    report.oracle_bound = eps_eff * vol + 1e-6;
    report.dynamic_static_bound = 2.0 * eps_eff * vol;
    const int iters = recommended_oracle_iters(config.alpha);
    for (NodeId s : sources) {
        const SparseVec& p = tracker.tracker(s).p();
        const auto pi = power_iteration_oracle(g, s, config.alpha, iters);
        double gap = 0.0;
        for (std::size_t u = 0; u < pi.size(); ++u) {
            gap += std::abs(p.get(static_cast<NodeId>(u)) - pi[u]);
        }
        report.max_oracle_gap = std::max(report.max_oracle_gap, gap);

        Tracker fresh(s, config.alpha, config.epsilon);
        dynamic_forward_push(fresh, g);
        report.max_dynamic_static_gap =
            std::max(report.max_dynamic_static_gap, l1_distance(p, fresh.p()));
    }
    return report;
}

} // namespace pprtrack
