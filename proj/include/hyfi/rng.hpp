#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hyfi::rng {

// All randomness in the project flows from a single master seed through
// labeled child streams, so independent components (augmentation, parameter
// init, split generation, ...) draw from disjoint deterministic streams.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t value) {
  std::uint64_t state = seed ^ (0x9e3779b97f4a7c15ull + value);
  std::uint64_t a = splitmix64(state);
  return splitmix64(state) ^ a;
}

inline std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t derive(std::uint64_t seed, std::string_view label) {
  return mix(seed, hash_label(label));
}

inline std::uint64_t derive(std::uint64_t seed, std::string_view label, std::uint64_t index) {
  return mix(derive(seed, label), index);
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

}  // namespace hyfi::rng
