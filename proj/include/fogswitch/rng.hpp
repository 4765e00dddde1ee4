#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace fogswitch {

// splitmix64 stream. std::mt19937 + std::uniform_*_distribution would work,
// but distribution output is implementation-defined and we promise
// byte-identical artifacts across platforms, so the few draws we need are
// spelled out here.
struct rng64 {
    explicit rng64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // [0, 1)
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // inclusive [lo, hi], unbiased via rejection
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        std::uint64_t range = std::uint64_t(hi - lo) + 1;
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
        std::uint64_t x;
        do { x = next(); } while (x >= limit);
        return lo + std::int64_t(x % range);
    }

    // standard normal, Box-Muller (two uniforms per call, spare discarded to
    // keep the draw count a pure function of the call count)
    double normal() {
        double u1 = uniform(), u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    std::uint64_t state;
};

// stable seed for a named sub-task: FNV-1a over the name mixed into the
// global seed. independent of the order sub-tasks are launched in, which is
// what makes parallel and sequential training produce identical bits.
inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view name) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    rng64 r(seed ^ h);
    return r.next();
}

}  // namespace fogswitch
