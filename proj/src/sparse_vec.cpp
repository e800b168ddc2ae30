#include "pprtrack/sparse_vec.hpp"

namespace pprtrack {

double l1_distance(const SparseVec& a, const SparseVec& b) {
    double s = 0.0;
    for (const auto& [i, v] : a.sorted_entries()) {
        s += std::abs(v - b.get(i));
    }
    for (const auto& [i, v] : b.sorted_entries()) {
        if (a.get(i) == 0.0) s += std::abs(v);
    }
    return s;
}

SparseVec l1_normalized(const SparseVec& v) {
    const double norm = v.l1_norm();
    if (norm == 0.0) return v;
    SparseVec out;
    for (const auto& [i, x] : v.sorted_entries()) {
        out.set(i, x / norm);
    }
    return out;
}

} // namespace pprtrack
