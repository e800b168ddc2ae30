#include "pprtrack/embedding.hpp"

#include <algorithm>
#include <cmath>

namespace pprtrack {

std::uint32_t murmur3_32(std::uint32_t key, std::uint32_t seed) {
    std::uint32_t k = key * 0xcc9e2d51u;
    k = (k << 15) | (k >> 17);
    k *= 0x1b873593u;
    std::uint32_t h = seed ^ k;
    h = (h << 13) | (h >> 19);
    h = h * 5u + 0xe6546b64u;
    h ^= 4u; // length in bytes
    h ^= h >> 16;
    h *= 0x85ebca6bu;
    h ^= h >> 13;
    h *= 0xc2b2ae35u;
    h ^= h >> 16;
    return h;
}

bool NodeRepresentation::is_zero() const {
    if (mode == RepMode::raw) return sparse.empty();
    return std::all_of(dense.begin(), dense.end(), [](double v) { return v == 0.0; });
}

double derived_epsilon_c(std::size_t ambient_nodes) {
    if (ambient_nodes == 0) return 1e-5;
    return std::min(1.0 / static_cast<double>(ambient_nodes), 1e-5);
}

RepMode select_mode(std::size_t ambient_nodes, std::uint32_t dim, bool force_hashed) {
    if (force_hashed) return RepMode::hashed;
    return ambient_nodes <= dim ? RepMode::raw : RepMode::hashed;
}

SparseVec sparsify(const SparseVec& p, double epsilon_c) {
    SparseVec out;
    for (const auto& [i, v] : p) {
        if (v > epsilon_c) out.set(i, v);
    }
    return out;
}

NodeRepresentation reduce_dim(const SparseVec& x, const EmbedOptions& opt) {
    NodeRepresentation rep;
    rep.mode = opt.mode;
    if (opt.mode == RepMode::raw) {
        rep.sparse = x;
        return rep;
    }
    rep.dense.assign(opt.hash.dim, 0.0);
    const double floor = std::log(opt.epsilon_c);
    for (const auto& [i, v] : x.sorted_entries()) {
        double lv = std::log(v);
        if (opt.log_floor && lv < floor) lv = floor;
        rep.dense[opt.hash.bucket(i)] += opt.hash.sign(i) * lv;
    }
    double norm = 0.0;
    for (double v : rep.dense) norm += std::abs(v);
    if (norm > 0.0) {
        for (double& v : rep.dense) v /= norm;
    }
    return rep;
}

std::vector<NodeRepresentation> dyn_node_rep(std::span<const SparseVec> series,
                                             const EmbedOptions& opt) {
    std::vector<NodeRepresentation> out;
    out.reserve(series.size());
    for (const SparseVec& p : series) {
        out.push_back(reduce_dim(l1_normalized(sparsify(p, opt.epsilon_c)), opt));
    }
    return out;
}

} // namespace pprtrack
