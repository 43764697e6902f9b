#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace nefreg {

// Caller-owned seeded stream. Same seed, same sequence.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::mt19937_64& engine() noexcept { return engine_; }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// 64-bit FNV-1a over the bytes of a label.
constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Per-replication seed: splitmix64(splitmix64(master ^ fnv1a64(label)) + index).
constexpr std::uint64_t mix_seed(std::uint64_t master, std::string_view label,
                                 std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master ^ fnv1a64(label)) + index);
}

}  // namespace nefreg
