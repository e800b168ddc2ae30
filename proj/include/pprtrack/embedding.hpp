#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pprtrack/sparse_vec.hpp"
#include "pprtrack/types.hpp"

namespace pprtrack {

// 32-bit MurmurHash3 of a node index under a seed.
std::uint32_t murmur3_32(std::uint32_t key, std::uint32_t seed);

// Bucket and sign hash functions for the signed-log sketch. Pure: the same
// index always maps to the same bucket/sign within a run.
struct HashPair {
    std::uint32_t dim = 1024;
    std::uint32_t seed_bucket = 0x9e3779b9u;
    std::uint32_t seed_sign = 0x85ebca6bu;

    std::uint32_t bucket(NodeId i) const { return murmur3_32(i, seed_bucket) % dim; }
    double sign(NodeId i) const { return (murmur3_32(i, seed_sign) & 1u) ? 1.0 : -1.0; }
};

enum class RepMode { raw, hashed };

// Per-snapshot node representation. In raw mode `sparse` holds the
// l1-normalized PPV unchanged; in hashed mode `dense` holds the normalized
// signed-log sketch of length dim. One mode is fixed for an entire run so
// representations stay comparable across snapshots.
struct NodeRepresentation {
    RepMode mode = RepMode::raw;
    SparseVec sparse;
    std::vector<double> dense;

    bool is_zero() const;
};

struct EmbedOptions {
    RepMode mode = RepMode::raw;
    HashPair hash;
    double epsilon_c = 1e-5;
    bool log_floor = true; // clamp log(x(i)) at log(epsilon_c)
};

// Sparsification threshold: min(1/|V|, 1e-5), fixed at run start.
double derived_epsilon_c(std::size_t ambient_nodes);

// Raw mode iff every node index the run can produce fits inside dim.
RepMode select_mode(std::size_t ambient_nodes, std::uint32_t dim, bool force_hashed);

// Drops every entry with value <= epsilon_c; remaining entries unchanged.
SparseVec sparsify(const SparseVec& p, double epsilon_c);

// Reduces an l1-normalized, sparsified vector to its representation. Raw
// mode returns the input unchanged. Hashed mode accumulates
// sketch[bucket(i)] += sign(i) * log(x(i)) over the support (ascending index
// order) and l1-normalizes the sketch; an all-zero sketch stays zero.
NodeRepresentation reduce_dim(const SparseVec& x, const EmbedOptions& opt);

// Full per-source pipeline: sparsify, l1-normalize (zero stays zero), reduce.
// Output length equals input length; each snapshot is processed
// independently, so results do not depend on series order.
std::vector<NodeRepresentation> dyn_node_rep(std::span<const SparseVec> series,
                                             const EmbedOptions& opt);

} // namespace pprtrack
