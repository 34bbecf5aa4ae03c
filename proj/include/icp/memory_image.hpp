#pragma once

#include <array>
#include <cstdint>
#include <map>

#include "icp/types.hpp"

namespace icp {

// Sparse byte-addressable memory. Unwritten bytes read as zero; words are
// little-endian. Backed by 64-byte lines so cache fills can copy a line at
// a time.
class MemoryImage {
 public:
  using Line = std::array<uint8_t, kLineSize>;

  uint8_t read_byte(uint64_t addr) const {
    auto it = lines_.find(line_of(addr));
    if (it == lines_.end()) return 0;
    return it->second[addr & (kLineSize - 1)];
  }

  void write_byte(uint64_t addr, uint8_t value) {
    lines_[line_of(addr)][addr & (kLineSize - 1)] = value;
  }

  uint64_t read(uint64_t addr, unsigned size) const {
    uint64_t v = 0;
    for (unsigned i = 0; i < size; ++i)
      v |= uint64_t(read_byte(addr + i)) << (8 * i);
    return v;
  }

  void write(uint64_t addr, uint64_t value, unsigned size) {
    for (unsigned i = 0; i < size; ++i)
      write_byte(addr + i, uint8_t(value >> (8 * i)));
  }

  uint64_t read_word(uint64_t addr) const { return read(addr, kWordSize); }
  void write_word(uint64_t addr, uint64_t value) { write(addr, value, kWordSize); }

  Line read_line(uint64_t line_addr) const {
    auto it = lines_.find(line_of(line_addr));
    if (it == lines_.end()) return Line{};
    return it->second;
  }

  // Ordered so serialization is deterministic.
  const std::map<uint64_t, Line>& lines() const { return lines_; }

  bool operator==(const MemoryImage&) const = default;

 private:
  std::map<uint64_t, Line> lines_;
};

}  // namespace icp
