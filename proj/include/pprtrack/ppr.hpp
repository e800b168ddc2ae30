#pragma once

#include <span>
#include <unordered_set>
#include <vector>

#include "pprtrack/graph.hpp"
#include "pprtrack/sparse_vec.hpp"
#include "pprtrack/types.hpp"

namespace pprtrack {

// Hard floor for the push threshold; configured epsilons below this are
// clamped up.
constexpr double kMinEpsilon = 1e-12;

// Per-source estimate/residual pair for local forward push. p and r are
// support-sparse; r may hold negative entries after deletions.
//
// The tracker remembers which nodes had their residual or out-degree touched
// since the last completed push, so an incremental push only has to examine
// those instead of rescanning the whole support. Direct mutation through
// p_mut()/r_mut() falls back to a full rescan on the next push.
class Tracker {
public:
    Tracker(NodeId source, double alpha, double epsilon);

    NodeId source() const { return source_; }
    double alpha() const { return alpha_; }
    double epsilon() const { return epsilon_; }
    double effective_epsilon() const {
        return epsilon_ < kMinEpsilon ? kMinEpsilon : epsilon_;
    }

    const SparseVec& p() const { return p_; }
    const SparseVec& r() const { return r_; }
    SparseVec& p_mut() {
        rescan_all_ = true;
        return p_;
    }
    SparseVec& r_mut() {
        rescan_all_ = true;
        return r_;
    }

private:
    friend void dynamic_forward_push(Tracker&, const DynamicGraph&);
    friend void adjust_for_event(Tracker&, const EdgeEvent&, const DynamicGraph&);

    // Duplicates are fine; the push seeding dedupes through its queue set.
    void mark(NodeId u) {
        if (!rescan_all_) pending_.push_back(u);
    }

    NodeId source_;
    double alpha_;
    double epsilon_;
    SparseVec p_;
    SparseVec r_;
    std::vector<NodeId> pending_;
    bool rescan_all_ = true;
};

// Local weighted forward push. Repeatedly takes a node u whose residual
// exceeds the per-degree threshold (|r(u)| > eps*d(u)), moves alpha*r(u) to
// the estimate and spreads (1-alpha)*r(u)*w/d(u) to each out-neighbor.
// Nodes are processed in FIFO order with an in-queue flag.
//
// A node with no out-edges is given an implicit unit self-loop; pushing it
// forever via that loop converges to p(u) += r(u), r(u) = 0, which is what
// this implementation applies in one step. The power-iteration oracle uses
// the same self-loop convention, so the two agree on any graph.
void dynamic_forward_push(Tracker& t, const DynamicGraph& g);

// Rebalances one tracker for a single edge event against the graph state
// BEFORE the event is applied. With D the pre-event out-degree of e.src and
// pu the pre-event estimate there:
//   p(src) *= (D + dw) / D
//   r(src) -= dw * pu / (alpha * D)
//   r(dst) += (1 - alpha)/alpha * dw * pu / D
// When pu == 0 all three rules are identities. When D == 0 and pu != 0 the
// source was previously drained as a dangling node; its estimate is folded
// back into the residual (the exact inverse of the drain), after which the
// D == 0 rules are no-ops.
void adjust_for_event(Tracker& t, const EdgeEvent& e, const DynamicGraph& g_pre);

// Dense reference PPV via power iteration on the row-stochastic transition
// matrix (dangling rows get a unit self-loop). Entrywise nonnegative and
// sums to 1 within rounding. Test/check oracle only; O(iters * edges).
std::vector<double> power_iteration_oracle(const DynamicGraph& g, NodeId s,
                                           double alpha, int iters);

// Iterations for the oracle to reach l1 error 1e-12: ceil(log_{1-alpha} 1e-12).
int recommended_oracle_iters(double alpha);

// Max over all nodes of the degree-balance residual
//   p(u) + alpha*r(u) - (1-alpha) * sum_{x in in(u)} w(x,u)*p(x)/d(x)
//                     - alpha*[u == source]
// evaluated with the dangling self-loop convention. Exactly zero (to
// rounding) whenever the tracker state is consistent with the graph.
// Diagnostic support for tests and the check command; scoring never calls it.
double max_invariant_residual(const Tracker& t, const DynamicGraph& g);

// Drives a set of trackers over a mutable graph shared by all of them:
// per event, every tracker is adjusted against the pre-event graph, then the
// event is applied; after a whole batch each tracker gets one push.
class StreamTracker {
public:
    StreamTracker(DynamicGraph& g, double alpha, double epsilon);

    // Registers a source and runs its initial push (p=0, r=1_s) on the
    // current graph. Ignored if already present.
    void add_source(NodeId s);
    bool has_source(NodeId s) const;
    const std::vector<NodeId>& sources() const { return order_; }

    const Tracker& tracker(NodeId s) const;
    Tracker& tracker_mut(NodeId s);

    // Adjust + apply each event in order, then push every tracker. Throws
    // NegativeWeightError with the offending event's position on a malformed
    // stream.
    void apply_batch(std::span<const EdgeEvent> batch);

    DynamicGraph& graph() { return g_; }
    const DynamicGraph& graph() const { return g_; }

private:
    DynamicGraph& g_;
    double alpha_;
    double epsilon_;
    std::vector<NodeId> order_;
    std::vector<Tracker> trackers_;
    std::unordered_map<NodeId, std::size_t> index_;
};

// Runs the full incremental schedule and records a deep copy of every
// per-source estimate after each snapshot: result[i] = [p^0 ... p^T] for
// sources[i]. batches[t-1] holds the events of snapshot t.
std::vector<std::vector<SparseVec>> increment_push(
    const DynamicGraph& g0, const std::vector<std::vector<EdgeEvent>>& batches,
    const std::vector<NodeId>& sources, double epsilon, double alpha);

} // namespace pprtrack
