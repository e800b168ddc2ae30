#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "pprtrack/anomaly.hpp"
#include "pprtrack/graph.hpp"
#include "pprtrack/rng.hpp"
#include "pprtrack/types.hpp"

namespace pprtrack {

enum class InjectionKind { star, link };

struct InjectionPlan {
    InjectionKind kind = InjectionKind::star;
    std::vector<Snapshot> snapshots;  // must lie after the initial snapshot
    int edges_per_injection = 70;
    int targets_per_star = 10;
    int pairs_per_link = 5;
    double high_degree_quantile = 0.01;
    std::uint64_t rng_seed = 1;
};

// Anomalous snapshots per node, from injected edge endpoints. k_u = |labels[u]|.
struct GroundTruth {
    std::map<NodeId, std::set<Snapshot>> labels;

    std::set<Snapshot> snapshots() const;
};

struct InjectionResult {
    std::vector<EdgeEvent> events;
    GroundTruth truth;
};

// Star injection: per chosen snapshot, picks one hub uniformly from the top
// quantile by degree (as of that snapshot in the injected stream), picks
// targets_per_star non-adjacent nodes uniformly, and appends
// edges_per_injection unit-weight hub->target events round-robin across the
// targets. Hub and targets are labeled at that snapshot. Throws
// InfeasibleError when too few non-adjacent nodes exist.
InjectionResult inject_star(std::span<const EdgeEvent> stream, const InjectionPlan& plan);

// Link injection: per chosen snapshot, draws pairs_per_link uniform pairs of
// distinct nodes and splits edges_per_injection unit-weight events across
// them as evenly as integer division allows (remainder to the earliest
// pairs). Both endpoints are labeled. Throws InfeasibleError on graphs with
// fewer than two nodes.
InjectionResult inject_link(std::span<const EdgeEvent> stream, const InjectionPlan& plan);

// Mean over labeled nodes of |top-k_u predicted snapshots ∩ Y_u| / k_u,
// with k_u = |Y_u| and score ties broken toward the earlier snapshot.
// Throws MissingSeriesError if a labeled node has no scores.
double precision_avg(std::span<const ScoreRecord> scores, const GroundTruth& truth);

// Fraction of the k highest-scoring snapshots (ties to the earlier snapshot)
// that are in truth_snapshots. k is clamped to the number of scored snapshots.
double precision_at_k(std::span<const std::pair<Snapshot, double>> graph_scores,
                      const std::set<Snapshot>& truth_snapshots, std::size_t k);

struct PrPoint {
    std::size_t k = 0;
    double precision = 0.0;
    double recall = 0.0;
};

std::vector<PrPoint> precision_recall_sweep(
    std::span<const std::pair<Snapshot, double>> graph_scores,
    const std::set<Snapshot>& truth_snapshots, std::span<const std::size_t> ks);

// i.i.d. uniform(0,1) scores for every node and snapshot in
// [first_snapshot, last_snapshot], deterministic under the seed.
std::vector<ScoreRecord> random_baseline(std::span<const NodeId> nodes,
                                         Snapshot first_snapshot,
                                         Snapshot last_snapshot,
                                         std::uint64_t seed);

// count distinct snapshots drawn uniformly from [lo, hi], ascending.
std::vector<Snapshot> choose_injection_snapshots(Snapshot lo, Snapshot hi,
                                                 std::size_t count, Rng& rng);

// Ground truth file: node<TAB>snapshot per line, '#' comments.
void write_ground_truth(std::ostream& out, const GroundTruth& truth,
                        const NodeTable& nodes);
GroundTruth read_ground_truth(std::istream& in, NodeTable& nodes);

} // namespace pprtrack
