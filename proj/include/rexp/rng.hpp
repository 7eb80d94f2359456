#pragma once

#include <cstdint>
#include <vector>

namespace rexp {

// Counter-based seeding: every random draw in the toolkit is a pure function
// of (seed, counter), so results never depend on evaluation order.

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t hash_u64(uint64_t a, uint64_t b) {
    return splitmix64(a ^ splitmix64(b + 0x9e3779b97f4a7c15ULL));
}

// Uniform in [0,1) with 53 significant bits.
inline double uniform01(uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline int pick_categorical(const std::vector<double>& weights, double u) {
    double acc = 0.0;
    for (size_t i = 0; i + 1 < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
}

}  // namespace rexp
