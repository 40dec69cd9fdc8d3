#pragma once

#include <cstdint>
#include <random>

namespace stacksl {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to hash (seed, index) pairs into independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

// Independent generator streams used by one episode. Keeping the pool, noise and gate
// draws on separate streams means learners run on the same seed see the same contexts.
enum class Stream : std::uint64_t { Truth = 1, Pool = 2, Noise = 3, Gate = 4 };

inline Rng make_stream(std::uint64_t run_seed, Stream s) {
    return Rng(derive_seed(run_seed, static_cast<std::uint64_t>(s)));
}

}  // namespace stacksl
