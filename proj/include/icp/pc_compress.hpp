#pragma once

#include <cstdint>

#include "icp/types.hpp"

namespace icp {

// 10-bit PC compression: low 4 bits of the word-aligned PC plus a 6-bit
// XOR fold of the remaining high bits placed above them.
inline uint16_t compress_pc(uint64_t pc) {
  uint64_t word = pc >> 2;
  uint16_t low = word & 0xF;
  uint64_t hi = word >> 4;
  uint16_t fold = 0;
  while (hi != 0) {
    fold ^= hi & 0x3F;
    hi >>= 6;
  }
  return low | uint16_t(fold << 4);
}

inline constexpr unsigned kCompressedPcBits = 10;

}  // namespace icp
