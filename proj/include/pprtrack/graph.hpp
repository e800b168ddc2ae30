#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pprtrack/types.hpp"

namespace pprtrack {

// One stream operation on an edge. Positive delta_w inserts or strengthens,
// negative weakens or deletes.
struct EdgeEvent {
    NodeId src = 0;
    NodeId dst = 0;
    double delta_w = 0.0;
    Snapshot snapshot = 0;

    friend bool operator==(const EdgeEvent&, const EdgeEvent&) = default;
};

// Append-only mapping between external string ids and dense indices.
// Indices are stable across the whole run.
class NodeTable {
public:
    NodeId intern(std::string_view name);
    std::optional<NodeId> find(std::string_view name) const;
    const std::string& name(NodeId id) const { return names_.at(id); }
    std::size_t size() const { return names_.size(); }

private:
    std::unordered_map<std::string, NodeId> index_;
    std::vector<std::string> names_;
};

// Dynamic weighted directed multigraph. Multi-edges are folded into a single
// weighted edge; the generalized out-degree d(v) is the sum of v's out-edge
// weights and is maintained incrementally. In-edges are kept alongside
// out-edges so the push invariant can be evaluated by direct summation;
// scoring never reads them.
class DynamicGraph {
public:
    using EdgeMap = std::unordered_map<NodeId, double>;

    // Weights at or below this magnitude count as an absent edge.
    static constexpr double kWeightZeroTol = 1e-12;

    // Grows storage so that `id` is a valid node (degree 0, no edges).
    void ensure_node(NodeId id);

    std::size_t node_count() const { return out_.size(); }
    std::uint64_t edge_event_count() const { return event_count_; }

    double degree(NodeId u) const {
        return u < degree_.size() ? degree_[u] : 0.0;
    }

    double weight(NodeId u, NodeId v) const;

    // Total generalized degree, summed in index order.
    double volume() const;

    // Applies one event: w(src,dst) += delta_w, degree(src) += delta_w.
    // Unseen endpoints are created with zero degree. Throws
    // NegativeWeightError (before any mutation) if the result would be
    // negative; a weight landing within kWeightZeroTol of zero removes the
    // edge.
    void apply_event(const EdgeEvent& e);

    // Current positive-weight out-edges of u, ascending by neighbor index.
    // Empty for unknown or dangling u.
    std::vector<std::pair<NodeId, double>> neighbors(NodeId u) const;

    static const EdgeMap& empty_edge_map();

    const EdgeMap& out_edges(NodeId u) const {
        return u < out_.size() ? out_[u] : empty_edge_map();
    }
    const EdgeMap& in_edges(NodeId u) const {
        return u < in_.size() ? in_[u] : empty_edge_map();
    }

private:
    std::vector<EdgeMap> out_;
    std::vector<EdgeMap> in_;
    std::vector<double> degree_;
    std::uint64_t event_count_ = 0;
};

// Expands a directed stream for undirected use: every event (u,v,dw,t) is
// followed immediately by (v,u,dw,t).
std::vector<EdgeEvent> mirror_stream(std::span<const EdgeEvent> events);

} // namespace pprtrack
