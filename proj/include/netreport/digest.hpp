#pragma once

// FNV-1a 64-bit digests, used for input fingerprints in run metadata and
// for deriving data-dependent random streams.

#include <cstdint>
#include <string>
#include <string_view>

namespace netreport {

inline constexpr std::uint64_t kFnvOffset = 0xCBF29CE484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001B3ULL;

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t state = kFnvOffset) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= kFnvPrime;
  }
  return state;
}

inline std::uint64_t fnv1a64_mix(std::uint64_t value, std::uint64_t state) {
  for (int k = 0; k < 8; ++k) {
    state ^= (value >> (8 * k)) & 0xFF;
    state *= kFnvPrime;
  }
  return state;
}

inline std::string to_hex(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int k = 15; k >= 0; --k) {
    out[k] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

}  // namespace netreport
