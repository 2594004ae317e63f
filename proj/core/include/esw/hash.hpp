#pragma once

#include <cstdint>
#include <string_view>

namespace esw {

/// FNV-1a 64-bit hash, used for model/config fingerprints in output headers
/// and cache keys. Stable across platforms and runs.
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t seed = 0xcbf29ce484222325ull) {
  std::uint64_t h = seed;
  for (unsigned char byte : data) {
    h ^= byte;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace esw
