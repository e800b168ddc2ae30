#include "pprtrack/ppr.hpp"

#include <cmath>
#include <deque>
#include <string>
#include <unordered_set>

namespace pprtrack {

Tracker::Tracker(NodeId source, double alpha, double epsilon)
    : source_(source), alpha_(alpha), epsilon_(epsilon) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error("alpha must be in (0,1), got " + std::to_string(alpha));
    }
    if (!(epsilon > 0.0)) {
        throw Error("epsilon must be positive, got " + std::to_string(epsilon));
    }
    r_.set(source, 1.0);
}

namespace {

bool is_dangling(const DynamicGraph& g, NodeId u) {
    return g.out_edges(u).empty();
}

} // namespace

void dynamic_forward_push(Tracker& t, const DynamicGraph& g) {
    const double alpha = t.alpha();
    const double eps = t.effective_epsilon();
    SparseVec& p = t.p_;
    SparseVec& r = t.r_;

    auto active = [&](NodeId u, double ru) {
        if (ru == 0.0) return false;
        if (is_dangling(g, u)) return true;
        return std::abs(ru) > eps * g.degree(u);
    };

    std::deque<NodeId> queue;
    std::unordered_set<NodeId> queued;
    if (t.rescan_all_) {
        for (const auto& [u, ru] : r.sorted_entries()) {
            if (active(u, ru)) {
                queue.push_back(u);
                queued.insert(u);
            }
        }
    } else {
        for (NodeId u : t.pending_) {
            if (active(u, r.get(u)) && queued.insert(u).second) {
                queue.push_back(u);
            }
        }
    }
    t.pending_.clear();
    t.rescan_all_ = false;

    while (!queue.empty()) {
        const NodeId u = queue.front();
        queue.pop_front();
        queued.erase(u);

        const double ru = r.get(u);
        if (ru == 0.0) continue;
        if (is_dangling(g, u)) {
            // Closed form of pushing the implicit self-loop to convergence.
            p.add(u, ru);
            r.erase(u);
            continue;
        }
        const double d = g.degree(u);
        if (std::abs(ru) <= eps * d) continue;

        p.add(u, alpha * ru);
        r.erase(u);
        const double spread = (1.0 - alpha) * ru / d;
        for (const auto& [v, w] : g.out_edges(u)) {
            const double rv = r.add(v, spread * w);
            if (active(v, rv) && queued.insert(v).second) {
                queue.push_back(v);
            }
        }
    }
}

void adjust_for_event(Tracker& t, const EdgeEvent& e, const DynamicGraph& g_pre) {
    // The event changes d(src) even when no rule fires, which can push an
    // existing residual over its threshold.
    t.mark(e.src);
    const double pu = t.p_.get(e.src);
    if (pu == 0.0) return;
    if (!std::isfinite(pu)) {
        throw InvariantError("non-finite estimate at node " + std::to_string(e.src));
    }
    if (is_dangling(g_pre, e.src)) {
        // The source was drained while dangling. Fold the estimate back into
        // the residual (exact inverse of the drain); the D=0 update rules are
        // then no-ops on p = 0.
        t.r_.add(e.src, pu);
        t.p_.erase(e.src);
        return;
    }
    const double d = g_pre.degree(e.src);
    const double alpha = t.alpha();
    const double shift = e.delta_w * pu / (alpha * d);
    t.r_.add(e.src, -shift);
    t.r_.add(e.dst, (1.0 - alpha) * shift);
    t.p_.set(e.src, pu * (d + e.delta_w) / d);
    t.mark(e.dst);
}

std::vector<double> power_iteration_oracle(const DynamicGraph& g, NodeId s,
                                           double alpha, int iters) {
    const std::size_t n = std::max<std::size_t>(g.node_count(), s + 1);

    // Frozen adjacency in index order so accumulation is reproducible.
    std::vector<std::vector<std::pair<NodeId, double>>> adj(n);
    for (NodeId u = 0; u < g.node_count(); ++u) {
        adj[u] = g.neighbors(u);
    }

    std::vector<double> pi(n, 0.0), next(n, 0.0);
    pi[s] = 1.0;
    for (int it = 0; it < iters; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        next[s] = alpha;
        for (NodeId u = 0; u < n; ++u) {
            const double mass = (1.0 - alpha) * pi[u];
            if (mass == 0.0) continue;
            if (adj[u].empty()) {
                next[u] += mass;
                continue;
            }
            const double d = g.degree(u);
            for (const auto& [v, w] : adj[u]) {
                next[v] += mass * w / d;
            }
        }
        pi.swap(next);
    }
    return pi;
}

int recommended_oracle_iters(double alpha) {
    return static_cast<int>(std::ceil(std::log(1e-12) / std::log(1.0 - alpha)));
}

double max_invariant_residual(const Tracker& t, const DynamicGraph& g) {
    const double alpha = t.alpha();
    std::size_t n = g.node_count();
    for (const auto& [u, v] : t.p()) n = std::max<std::size_t>(n, u + 1);
    for (const auto& [u, v] : t.r()) n = std::max<std::size_t>(n, u + 1);
    n = std::max<std::size_t>(n, t.source() + 1);

    double worst = 0.0;
    for (NodeId u = 0; u < n; ++u) {
        double in_sum = 0.0;
        for (const auto& [x, w] : g.in_edges(u)) {
            const double px = t.p().get(x);
            if (px != 0.0) in_sum += w * px / g.degree(x);
        }
        if (is_dangling(g, u)) {
            in_sum += t.p().get(u); // implicit unit self-loop, d_eff = 1
        }
        const double lhs = t.p().get(u) + alpha * t.r().get(u);
        const double rhs = (1.0 - alpha) * in_sum + (u == t.source() ? alpha : 0.0);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

StreamTracker::StreamTracker(DynamicGraph& g, double alpha, double epsilon)
    : g_(g), alpha_(alpha), epsilon_(epsilon) {}

void StreamTracker::add_source(NodeId s) {
    if (has_source(s)) return;
    g_.ensure_node(s);
    index_.emplace(s, trackers_.size());
    order_.push_back(s);
    trackers_.emplace_back(s, alpha_, epsilon_);
    dynamic_forward_push(trackers_.back(), g_);
}

bool StreamTracker::has_source(NodeId s) const { return index_.count(s) > 0; }

const Tracker& StreamTracker::tracker(NodeId s) const {
    return trackers_.at(index_.at(s));
}

Tracker& StreamTracker::tracker_mut(NodeId s) {
    return trackers_.at(index_.at(s));
}

void StreamTracker::apply_batch(std::span<const EdgeEvent> batch) {
    std::size_t i = 0;
    for (const EdgeEvent& e : batch) {
        const std::string where = "snapshot " + std::to_string(e.snapshot) +
                                  ", event " + std::to_string(i) + ": ";
        try {
            if (g_.weight(e.src, e.dst) + e.delta_w < -DynamicGraph::kWeightZeroTol) {
                // reject before any tracker is adjusted with the bad event
                g_.apply_event(e);
            }
            for (Tracker& t : trackers_) {
                adjust_for_event(t, e, g_);
            }
            g_.apply_event(e);
        } catch (const NegativeWeightError& err) {
            throw NegativeWeightError(where + err.what());
        } catch (const InvariantError& err) {
            throw InvariantError(where + err.what());
        }
        ++i;
    }
    for (Tracker& t : trackers_) {
        dynamic_forward_push(t, g_);
    }
}

std::vector<std::vector<SparseVec>> increment_push(
    const DynamicGraph& g0, const std::vector<std::vector<EdgeEvent>>& batches,
    const std::vector<NodeId>& sources, double epsilon, double alpha) {
    DynamicGraph g = g0;
    StreamTracker st(g, alpha, epsilon);
    std::vector<std::vector<SparseVec>> series(sources.size());
    for (std::size_t i = 0; i < sources.size(); ++i) {
        st.add_source(sources[i]);
        series[i].push_back(st.tracker(sources[i]).p());
    }
    for (const auto& batch : batches) {
        st.apply_batch(batch);
        for (std::size_t i = 0; i < sources.size(); ++i) {
            series[i].push_back(st.tracker(sources[i]).p());
        }
    }
    return series;
}

} // namespace pprtrack
