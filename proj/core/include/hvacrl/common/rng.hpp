#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hvacrl {

// SplitMix64 finalizer. Used to derive decorrelated seeds from a root seed.
std::uint64_t splitmix64(std::uint64_t x);

// Named substream derivation: one root seed fans out into independent streams
// ("data", "es", "ppo", "eval", ...) so that reruns of any stage are
// reproducible in isolation.
std::uint64_t derive_seed(std::uint64_t root, std::string_view name);
std::uint64_t derive_seed(std::uint64_t root, std::string_view name, std::uint64_t index);

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace hvacrl
