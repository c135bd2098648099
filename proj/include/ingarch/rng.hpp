#pragma once

#include <cstdint>
#include <random>

namespace ingarch {

/// splitmix64 step; the standard finalizer used for seed mixing.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic per-task seed derivation. Streams are identified by up to
/// three indices (e.g. order, sample size, replication); the result depends
/// only on the arguments, never on worker layout, so replications can be
/// farmed out to any number of threads and still reproduce bit-identically.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = master;
    std::uint64_t z = splitmix64(s);
    s ^= z + a;
    z = splitmix64(s);
    s ^= z + b;
    z = splitmix64(s);
    s ^= z + c;
    return splitmix64(s);
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

} // namespace ingarch
