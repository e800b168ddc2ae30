#include "pprtrack/injection.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>

namespace pprtrack {
namespace {

void validate_plan(const InjectionPlan& plan, Snapshot max_snapshot) {
    if (plan.edges_per_injection <= 0 || plan.targets_per_star <= 0 ||
        plan.pairs_per_link <= 0) {
        throw InfeasibleError("injection counts must be positive");
    }
    for (Snapshot t : plan.snapshots) {
        if (t < 1 || t > max_snapshot) {
            throw InfeasibleError("injection snapshot " + std::to_string(t) +
                                  " outside stream range [1, " +
                                  std::to_string(max_snapshot) + "]");
        }
    }
}

Snapshot stream_max_snapshot(std::span<const EdgeEvent> stream) {
    Snapshot m = 0;
    for (const EdgeEvent& e : stream) m = std::max(m, e.snapshot);
    return m;
}

// Nodes ranked by (degree desc, index asc); top max(1, ceil(q*n)) of them.
std::vector<NodeId> top_quantile_nodes(const DynamicGraph& g, double quantile) {
    std::vector<NodeId> ids(g.node_count());
    for (NodeId u = 0; u < g.node_count(); ++u) ids[u] = u;
    const auto count = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::ceil(quantile * static_cast<double>(ids.size()))));
    const std::size_t k = std::min(count, ids.size());
    std::partial_sort(ids.begin(), ids.begin() + k, ids.end(),
                      [&](NodeId a, NodeId b) {
                          const double da = g.degree(a), db = g.degree(b);
                          if (da != db) return da > db;
                          return a < b;
                      });
    ids.resize(k);
    return ids;
}

// Replays the stream snapshot by snapshot, invoking `inject` after each
// chosen snapshot's events (injected events are applied to the replay graph
// so later degree rankings see them).
template <typename InjectFn>
InjectionResult replay_and_inject(std::span<const EdgeEvent> stream,
                                  const InjectionPlan& plan, InjectFn inject) {
    const Snapshot max_snapshot = stream_max_snapshot(stream);
    validate_plan(plan, max_snapshot);
    std::set<Snapshot> chosen(plan.snapshots.begin(), plan.snapshots.end());

    InjectionResult result;
    result.events.reserve(stream.size() +
                          chosen.size() * static_cast<std::size_t>(plan.edges_per_injection));
    DynamicGraph g;
    Rng rng(plan.rng_seed);

    std::size_t i = 0;
    for (Snapshot t = 0; t <= max_snapshot; ++t) {
        while (i < stream.size() && stream[i].snapshot == t) {
            g.apply_event(stream[i]);
            result.events.push_back(stream[i]);
            ++i;
        }
        if (chosen.count(t)) {
            inject(g, t, rng, result);
        }
    }
    return result;
}

void append_injected(DynamicGraph& g, InjectionResult& result, NodeId src,
                     NodeId dst, Snapshot t) {
    EdgeEvent e{src, dst, 1.0, t};
    g.apply_event(e);
    result.events.push_back(e);
}

} // namespace

std::set<Snapshot> GroundTruth::snapshots() const {
    std::set<Snapshot> out;
    for (const auto& [node, snaps] : labels) {
        out.insert(snaps.begin(), snaps.end());
    }
    return out;
}

InjectionResult inject_star(std::span<const EdgeEvent> stream, const InjectionPlan& plan) {
    return replay_and_inject(
        stream, plan,
        [&plan](DynamicGraph& g, Snapshot t, Rng& rng, InjectionResult& result) {
            const auto top = top_quantile_nodes(g, plan.high_degree_quantile);
            if (top.empty()) {
                throw InfeasibleError("no nodes available at snapshot " + std::to_string(t));
            }
            const NodeId hub = top[rng.below(top.size())];

            std::vector<NodeId> candidates;
            for (NodeId x = 0; x < g.node_count(); ++x) {
                if (x == hub) continue;
                if (g.weight(hub, x) > 0.0 || g.weight(x, hub) > 0.0) continue;
                candidates.push_back(x);
            }
            const auto want = static_cast<std::size_t>(plan.targets_per_star);
            if (candidates.size() < want) {
                throw InfeasibleError("snapshot " + std::to_string(t) + ": only " +
                                      std::to_string(candidates.size()) +
                                      " non-adjacent nodes for a " +
                                      std::to_string(want) + "-target star");
            }
            std::vector<NodeId> targets;
            for (std::uint64_t idx : rng.sample_without_replacement(candidates.size(), want)) {
                targets.push_back(candidates[idx]);
            }
            for (int j = 0; j < plan.edges_per_injection; ++j) {
                append_injected(g, result, hub, targets[j % targets.size()], t);
            }
            result.truth.labels[hub].insert(t);
            for (NodeId x : targets) result.truth.labels[x].insert(t);
        });
}

InjectionResult inject_link(std::span<const EdgeEvent> stream, const InjectionPlan& plan) {
    return replay_and_inject(
        stream, plan,
        [&plan](DynamicGraph& g, Snapshot t, Rng& rng, InjectionResult& result) {
            const std::size_t n = g.node_count();
            if (n < 2) {
                throw InfeasibleError("snapshot " + std::to_string(t) +
                                      ": need at least 2 nodes for link injection");
            }
            const int pairs = plan.pairs_per_link;
            const int base = plan.edges_per_injection / pairs;
            const int rem = plan.edges_per_injection % pairs;
            for (int idx = 0; idx < pairs; ++idx) {
                const NodeId u = static_cast<NodeId>(rng.below(n));
                NodeId v = static_cast<NodeId>(rng.below(n - 1));
                if (v >= u) ++v;
                const int count = base + (idx < rem ? 1 : 0);
                for (int j = 0; j < count; ++j) {
                    append_injected(g, result, u, v, t);
                }
                result.truth.labels[u].insert(t);
                result.truth.labels[v].insert(t);
            }
        });
}

double precision_avg(std::span<const ScoreRecord> scores, const GroundTruth& truth) {
    if (truth.labels.empty()) return 0.0;
    std::unordered_map<NodeId, std::vector<std::pair<Snapshot, double>>> by_node;
    for (const ScoreRecord& rec : scores) {
        by_node[rec.node].emplace_back(rec.snapshot, rec.score);
    }
    double total = 0.0;
    for (const auto& [node, label_snaps] : truth.labels) {
        auto it = by_node.find(node);
        if (it == by_node.end() || it->second.empty()) {
            throw MissingSeriesError("labeled node " + std::to_string(node) +
                                     " has no score series");
        }
        auto series = it->second;
        std::sort(series.begin(), series.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        const std::size_t k = std::min(label_snaps.size(), series.size());
        std::size_t hits = 0;
        for (std::size_t i = 0; i < k; ++i) {
            if (label_snaps.count(series[i].first)) ++hits;
        }
        total += static_cast<double>(hits) / static_cast<double>(label_snaps.size());
    }
    return total / static_cast<double>(truth.labels.size());
}

namespace {

std::size_t top_k_hits(std::span<const std::pair<Snapshot, double>> graph_scores,
                       const std::set<Snapshot>& truth, std::size_t k) {
    std::vector<std::pair<Snapshot, double>> ranked(graph_scores.begin(),
                                                    graph_scores.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::size_t hits = 0;
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
        if (truth.count(ranked[i].first)) ++hits;
    }
    return hits;
}

} // namespace

double precision_at_k(std::span<const std::pair<Snapshot, double>> graph_scores,
                      const std::set<Snapshot>& truth_snapshots, std::size_t k) {
    const std::size_t effective = std::min(k, graph_scores.size());
    if (effective == 0) return 0.0;
    return static_cast<double>(top_k_hits(graph_scores, truth_snapshots, effective)) /
           static_cast<double>(effective);
}

std::vector<PrPoint> precision_recall_sweep(
    std::span<const std::pair<Snapshot, double>> graph_scores,
    const std::set<Snapshot>& truth_snapshots, std::span<const std::size_t> ks) {
    std::vector<PrPoint> out;
    out.reserve(ks.size());
    for (std::size_t k : ks) {
        const std::size_t effective = std::min(k, graph_scores.size());
        const std::size_t hits =
            effective == 0 ? 0 : top_k_hits(graph_scores, truth_snapshots, effective);
        PrPoint pt;
        pt.k = k;
        pt.precision = effective == 0
                           ? 0.0
                           : static_cast<double>(hits) / static_cast<double>(effective);
        pt.recall = truth_snapshots.empty()
                        ? 0.0
                        : static_cast<double>(hits) /
                              static_cast<double>(truth_snapshots.size());
        out.push_back(pt);
    }
    return out;
}

std::vector<ScoreRecord> random_baseline(std::span<const NodeId> nodes,
                                         Snapshot first_snapshot,
                                         Snapshot last_snapshot,
                                         std::uint64_t seed) {
    Rng rng(seed);
    std::vector<ScoreRecord> out;
    for (NodeId node : nodes) {
        for (Snapshot t = first_snapshot; t <= last_snapshot; ++t) {
            out.push_back(ScoreRecord{node, t, rng.uniform()});
        }
    }
    return out;
}

std::vector<Snapshot> choose_injection_snapshots(Snapshot lo, Snapshot hi,
                                                 std::size_t count, Rng& rng) {
    if (hi < lo) return {};
    const auto range = static_cast<std::uint64_t>(hi - lo + 1);
    std::vector<Snapshot> out;
    for (std::uint64_t idx :
         rng.sample_without_replacement(range, std::min<std::uint64_t>(count, range))) {
        out.push_back(lo + static_cast<Snapshot>(idx));
    }
    std::sort(out.begin(), out.end());
    return out;
}

void write_ground_truth(std::ostream& out, const GroundTruth& truth,
                        const NodeTable& nodes) {
    out << "# node\tsnapshot\n";
    for (const auto& [node, snaps] : truth.labels) {
        for (Snapshot t : snaps) {
            out << nodes.name(node) << '\t' << t << '\n';
        }
    }
}

GroundTruth read_ground_truth(std::istream& in, NodeTable& nodes) {
    GroundTruth truth;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (raw.empty() || raw.front() == '#') continue;
        const std::size_t tab = raw.find('\t');
        if (tab == std::string::npos) {
            throw ParseError(line_no, "expected node<TAB>snapshot");
        }
        const std::string name = raw.substr(0, tab);
        Snapshot t = 0;
        try {
            t = std::stoll(raw.substr(tab + 1));
        } catch (const std::exception&) {
            throw ParseError(line_no, "bad snapshot '" + raw.substr(tab + 1) + "'");
        }
        truth.labels[nodes.intern(name)].insert(t);
    }
    return truth;
}

} // namespace pprtrack
