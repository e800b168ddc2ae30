#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pprtrack/types.hpp"

namespace pprtrack {

// Support-sparse vector over node indices. Entries that become exactly zero
// are dropped so the support always equals the set of nonzero coordinates.
class SparseVec {
public:
    using Map = std::unordered_map<NodeId, double>;

    SparseVec() = default;

    double get(NodeId i) const {
        auto it = map_.find(i);
        return it == map_.end() ? 0.0 : it->second;
    }

    void set(NodeId i, double v) {
        if (v == 0.0) {
            map_.erase(i);
        } else {
            map_[i] = v;
        }
    }

    // Returns the resulting value at i.
    double add(NodeId i, double v) {
        if (v == 0.0) return get(i);
        auto [it, inserted] = map_.try_emplace(i, v);
        if (inserted) return v;
        it->second += v;
        const double result = it->second;
        if (result == 0.0) map_.erase(it);
        return result;
    }

    void erase(NodeId i) { map_.erase(i); }
    void clear() { map_.clear(); }

    bool empty() const { return map_.empty(); }
    std::size_t support_size() const { return map_.size(); }

    Map::const_iterator begin() const { return map_.begin(); }
    Map::const_iterator end() const { return map_.end(); }

    // Entries in ascending index order; use wherever iteration order feeds
    // floating-point accumulation or serialized output.
    std::vector<std::pair<NodeId, double>> sorted_entries() const {
        std::vector<std::pair<NodeId, double>> out(map_.begin(), map_.end());
        std::sort(out.begin(), out.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        return out;
    }

    double sum() const {
        double s = 0.0;
        for (const auto& [i, v] : sorted_entries()) s += v;
        return s;
    }

    double l1_norm() const {
        double s = 0.0;
        for (const auto& [i, v] : sorted_entries()) s += std::abs(v);
        return s;
    }

    // Drop entries with |value| <= tol.
    void prune(double tol) {
        for (auto it = map_.begin(); it != map_.end();) {
            if (std::abs(it->second) <= tol) {
                it = map_.erase(it);
            } else {
                ++it;
            }
        }
    }

    friend bool operator==(const SparseVec& a, const SparseVec& b) {
        return a.map_ == b.map_;
    }

private:
    Map map_;
};

// l1 distance over the union of supports.
double l1_distance(const SparseVec& a, const SparseVec& b);

// Scale so the l1 norm is 1; the zero vector stays zero.
SparseVec l1_normalized(const SparseVec& v);

} // namespace pprtrack
