#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <utility>

namespace placemove {

// splitmix64, used for seed mixing and as the single RNG everywhere so that
// results do not depend on libstdc++ distribution internals.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t hash_name(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Named sub-stream derivation: one --seed flag fans out to independent
// deterministic streams (ingest/pairs/train/...).
inline uint64_t substream(uint64_t seed, std::string_view name, uint64_t index = 0) {
    return mix64(seed ^ mix64(hash_name(name)) ^ mix64(index * 0x9e3779b97f4a7c15ULL + 1));
}

// xoshiro256** — small, fast, reproducible across platforms.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& w : s_) w = mix64(x += 0x9e3779b97f4a7c15ULL);
    }

    uint64_t next() {
        auto rotl = [](uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
        uint64_t result = rotl(s_[1] * 5, 7) * 9;
        uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in [0,1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n), n > 0
    uint64_t below(uint64_t n) {
        // rejection sampling; bias-free
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % n;
    }

    // standard normal via Box-Muller (no state carried between calls)
    double normal() {
        double u1 = 0.0;
        while (u1 == 0.0) u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    double lognormal(double mu, double sigma) { return std::exp(normal(mu, sigma)); }

    template <typename Vec>
    void shuffle(Vec& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t s_[4];
};

}  // namespace placemove
