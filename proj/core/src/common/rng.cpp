#include "hvacrl/common/rng.hpp"

namespace hvacrl {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

// FNV-1a over the stream name, then mixed with the root seed.
std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::string_view name) {
  return splitmix64(root ^ splitmix64(fnv1a(name)));
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view name, std::uint64_t index) {
  return splitmix64(derive_seed(root, name) + 0x9e3779b97f4a7c15ULL * (index + 1));
}

}  // namespace hvacrl
