#include "pprtrack/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pprtrack {

NodeId NodeTable::intern(std::string_view name) {
    auto it = index_.find(std::string(name));
    if (it != index_.end()) return it->second;
    NodeId id = static_cast<NodeId>(names_.size());
    names_.emplace_back(name);
    index_.emplace(names_.back(), id);
    return id;
}

std::optional<NodeId> NodeTable::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const DynamicGraph::EdgeMap& DynamicGraph::empty_edge_map() {
    static const EdgeMap empty;
    return empty;
}

void DynamicGraph::ensure_node(NodeId id) {
    if (id >= out_.size()) {
        out_.resize(id + 1);
        in_.resize(id + 1);
        degree_.resize(id + 1, 0.0);
    }
}

double DynamicGraph::weight(NodeId u, NodeId v) const {
    if (u >= out_.size()) return 0.0;
    auto it = out_[u].find(v);
    return it == out_[u].end() ? 0.0 : it->second;
}

double DynamicGraph::volume() const {
    double vol = 0.0;
    for (double d : degree_) vol += d;
    return vol;
}

void DynamicGraph::apply_event(const EdgeEvent& e) {
    const double current = weight(e.src, e.dst);
    const double updated = current + e.delta_w;
    if (updated < -kWeightZeroTol) {
        throw NegativeWeightError(
            "edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) +
            ") weight " + std::to_string(current) + " cannot absorb delta " +
            std::to_string(e.delta_w));
    }
    ensure_node(std::max(e.src, e.dst));
    degree_[e.src] += e.delta_w;
    if (std::abs(updated) <= kWeightZeroTol) {
        // Remove the edge and return any cancellation dust to the degree so
        // degree stays the exact sum of stored edges.
        degree_[e.src] -= updated;
        out_[e.src].erase(e.dst);
        in_[e.dst].erase(e.src);
    } else {
        out_[e.src][e.dst] = updated;
        in_[e.dst][e.src] = updated;
    }
    ++event_count_;
}

std::vector<std::pair<NodeId, double>> DynamicGraph::neighbors(NodeId u) const {
    std::vector<std::pair<NodeId, double>> out(out_edges(u).begin(), out_edges(u).end());
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

std::vector<EdgeEvent> mirror_stream(std::span<const EdgeEvent> events) {
    std::vector<EdgeEvent> out;
    out.reserve(events.size() * 2);
    for (const EdgeEvent& e : events) {
        out.push_back(e);
        out.push_back(EdgeEvent{e.dst, e.src, e.delta_w, e.snapshot});
    }
    return out;
}

} // namespace pprtrack
