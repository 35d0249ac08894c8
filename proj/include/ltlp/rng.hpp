#pragma once

// Seeded random streams plus the per-stage seed derivation scheme.
// Every randomized stage in the toolkit takes its seed from one root seed
// through derive_seed(root, stage_name[, index]), so stages can be re-run
// in isolation and still reproduce a full run bit for bit.

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace ltlp {

// FNV-1a over the stage name, mixed with the root seed.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view stage) {
    std::uint64_t h = 14695981039346656037ull ^ root;
    for (unsigned char c : stage) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Per-index substream (e.g. one stream per epoch or per sweep seed).
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view stage,
                                 std::uint64_t index) {
    std::uint64_t z = derive_seed(root, stage) + 0x9e3779b97f4a7c15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// mt19937_64 with hand-rolled conversions. Avoids std distribution objects,
// whose output is implementation-defined, so streams are stable across
// standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0,1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // unbiased draw from [0,n)
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

} // namespace ltlp
