#ifndef METATREE_SEEDING_HPP
#define METATREE_SEEDING_HPP

#include <cstdint>

namespace metatree {

// SplitMix64 finalizer. Used to derive independent child seeds from a
// parent seed so that work units (cases, datasets, restarts) can run in
// any order or in parallel with identical results.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Child seed for the `index`-th work unit under `parent`.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
  return mix64(parent ^ mix64(index));
}

}  // namespace metatree

#endif
