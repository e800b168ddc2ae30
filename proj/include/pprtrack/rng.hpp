#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace pprtrack {

// mt19937_64 with hand-rolled bounded/real draws. The engine's raw output is
// pinned by the standard, and doing the conversions ourselves keeps sampled
// streams identical across standard libraries (std::uniform_int_distribution
// is implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, n), unbiased via rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // k distinct indices from [0, n), in selection order (partial
    // Fisher-Yates over an explicit index pool).
    std::vector<std::uint64_t> sample_without_replacement(std::uint64_t n, std::uint64_t k) {
        std::vector<std::uint64_t> pool(n);
        for (std::uint64_t i = 0; i < n; ++i) pool[i] = i;
        std::vector<std::uint64_t> out;
        out.reserve(k);
        for (std::uint64_t i = 0; i < k && i < n; ++i) {
            std::uint64_t j = i + below(n - i);
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
        return out;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace pprtrack
