#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace lfqa {

// 64-bit FNV-1a. Used for stub-embedding keys, store checksums and config
// hashes; stable across platforms.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

std::uint64_t mix64(std::uint64_t x) noexcept;

std::string hex64(std::uint64_t value);

/// Portable pseudo-random source. std::mt19937_64 has a fully specified
/// output sequence; the distributions below are written out so results do
/// not depend on the standard library's distribution implementations.
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform double in [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lfqa
