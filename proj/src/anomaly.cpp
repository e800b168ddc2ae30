#include "pprtrack/anomaly.hpp"

#include <algorithm>
#include <cmath>

namespace pprtrack {
namespace {

double lp_accumulate(double acc, double diff, int p_norm) {
    return acc + (p_norm == 1 ? std::abs(diff) : diff * diff);
}

} // namespace

double node_score(const NodeRepresentation& prev, const NodeRepresentation& cur,
                  int p_norm) {
    if (prev.mode != cur.mode) {
        throw ModeMismatchError("representations have different modes");
    }
    if (p_norm != 1 && p_norm != 2) {
        throw Error("p_norm must be 1 or 2");
    }
    double acc = 0.0;
    if (prev.mode == RepMode::raw) {
        for (const auto& [i, v] : prev.sparse.sorted_entries()) {
            acc = lp_accumulate(acc, cur.sparse.get(i) - v, p_norm);
        }
        for (const auto& [i, v] : cur.sparse.sorted_entries()) {
            if (prev.sparse.get(i) == 0.0) acc = lp_accumulate(acc, v, p_norm);
        }
    } else {
        if (prev.dense.size() != cur.dense.size()) {
            throw ModeMismatchError("hashed representations have different dimensions");
        }
        for (std::size_t i = 0; i < prev.dense.size(); ++i) {
            acc = lp_accumulate(acc, cur.dense[i] - prev.dense[i], p_norm);
        }
    }
    return p_norm == 1 ? acc : std::sqrt(acc);
}

std::vector<ScoreRecord> node_score_series(NodeId source,
                                           std::span<const NodeRepresentation> reps,
                                           int p_norm, Snapshot first_snapshot) {
    std::vector<ScoreRecord> out;
    if (reps.size() < 2) return out;
    out.reserve(reps.size() - 1);
    for (std::size_t t = 1; t < reps.size(); ++t) {
        out.push_back(ScoreRecord{source, first_snapshot + static_cast<Snapshot>(t - 1),
                                  node_score(reps[t - 1], reps[t], p_norm)});
    }
    return out;
}

void TrackingList::update(const DynamicGraph& g) {
    std::vector<NodeId> ids(g.node_count());
    for (NodeId u = 0; u < g.node_count(); ++u) ids[u] = u;
    const std::size_t k = std::min(capacity_, ids.size());
    std::partial_sort(ids.begin(), ids.begin() + k, ids.end(),
                      [&](NodeId a, NodeId b) {
                          const double da = g.degree(a), db = g.degree(b);
                          if (da != db) return da > db;
                          return a < b;
                      });
    for (std::size_t i = 0; i < k; ++i) {
        if (set_.insert(ids[i]).second) {
            members_.push_back(ids[i]);
        }
    }
}

double graph_score(const std::unordered_map<NodeId, SparseVec>& ppv_prev,
                   const std::unordered_map<NodeId, SparseVec>& ppv_cur,
                   const TrackingList& tracked) {
    static const SparseVec zero;
    double best = 0.0;
    for (NodeId s : tracked.members()) {
        auto pit = ppv_prev.find(s);
        auto cit = ppv_cur.find(s);
        const SparseVec& prev = pit == ppv_prev.end() ? zero : pit->second;
        const SparseVec& cur = cit == ppv_cur.end() ? zero : cit->second;
        best = std::max(best, l1_distance(prev, cur));
    }
    return best;
}

} // namespace pprtrack
