#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace covdiff::rng {

// splitmix64 finalizer; used to decorrelate (seed, stream) pairs.
inline std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic substream: the engine for stream `index` of a master seed.
// Streams are independent of execution order, so parallel consumers that
// each own a stream reproduce the sequential result bit for bit.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(mix(mix(seed) ^ mix(index + 0x51ed270b7a249a55ULL)));
}

// A named sub-seed, for deriving independent seeds per purpose (data draw,
// bootstrap, ...) from one master seed.
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0) {
    return mix(mix(seed) ^ mix(tag) ^ mix(index + 0xd1342543de82ef95ULL));
}

inline std::vector<double> standard_normals(std::mt19937_64& eng, std::size_t count) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> out(count);
    for (auto& v : out) v = normal(eng);
    return out;
}

}  // namespace covdiff::rng
