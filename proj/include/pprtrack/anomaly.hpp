#pragma once

#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pprtrack/embedding.hpp"
#include "pprtrack/graph.hpp"
#include "pprtrack/sparse_vec.hpp"
#include "pprtrack/types.hpp"

namespace pprtrack {

struct ScoreRecord {
    NodeId node = 0;
    Snapshot snapshot = 0;
    double score = 0.0;
};

// lp distance (p in {1,2}) between two representations of the same mode.
// Throws ModeMismatchError on mode or dimension mismatch.
double node_score(const NodeRepresentation& prev, const NodeRepresentation& cur,
                  int p_norm);

// T records for a length-(T+1) representation series: record t holds the
// distance between reps t-1 and t, with snapshot ids first_snapshot..T.
std::vector<ScoreRecord> node_score_series(NodeId source,
                                           std::span<const NodeRepresentation> reps,
                                           int p_norm, Snapshot first_snapshot = 1);

// Append-only set of high-degree nodes used for graph-level scoring. Each
// update unions in the current top-capacity nodes by generalized degree
// (ties to the smaller index); members are never evicted.
class TrackingList {
public:
    explicit TrackingList(std::size_t capacity_per_snapshot = 100)
        : capacity_(capacity_per_snapshot) {}

    void update(const DynamicGraph& g);

    const std::vector<NodeId>& members() const { return members_; }
    bool contains(NodeId u) const { return set_.count(u) > 0; }
    std::size_t capacity_per_snapshot() const { return capacity_; }

private:
    std::size_t capacity_;
    std::vector<NodeId> members_; // insertion order
    std::unordered_set<NodeId> set_;
};

// Graph-level score: max over tracked members of the l1 distance between the
// member's unnormalized estimate vectors at consecutive snapshots. Members
// missing from a map count as the zero vector.
double graph_score(const std::unordered_map<NodeId, SparseVec>& ppv_prev,
                   const std::unordered_map<NodeId, SparseVec>& ppv_cur,
                   const TrackingList& tracked);

} // namespace pprtrack
