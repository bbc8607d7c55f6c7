#pragma once

#include <cstdint>
#include <span>

namespace creditlens {

// Pairwise (tree) summation. Deterministic for a fixed term order and keeps
// rounding error at O(log n) instead of O(n).
double pairwise_sum(std::span<const double> terms);

// splitmix64 finalizer. Stateless 64-bit mixer used both for hashing and as
// the core of the counter-based sample streams.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a over a byte range; stable across platforms.
std::uint64_t fnv1a(const void* data, std::size_t len,
                    std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace creditlens
