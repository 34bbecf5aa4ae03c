#pragma once

#include <cstdint>
#include <vector>

#include "icp/config.hpp"
#include "icp/types.hpp"

namespace icp {

// Per-PC stride prefetcher trained on L1 demand accesses. Confidence is a
// 0..3 saturating counter; degree-D line prefetches are emitted once
// confidence reaches 2.
class StridePrefetcher {
 public:
  explicit StridePrefetcher(const SimConfig& cfg)
      : degree_(cfg.stride_degree), entries_(cfg.stride_entries) {
    table_.resize(entries_);
    recent_.resize(kRecent, ~uint64_t(0));
  }

  std::vector<uint64_t> train(uint64_t pc, uint64_t addr) {
    std::vector<uint64_t> out;
    Entry* e = lookup_or_alloc(pc);
    if (e->valid && e->pc == pc) {
      int64_t delta = int64_t(addr) - int64_t(e->last_addr);
      bool matched = false;
      if (!e->has_stride) {
        e->stride = delta;
        e->has_stride = true;
        e->confidence = 1;
      } else if (delta == e->stride && delta != 0) {
        if (e->confidence < 3) ++e->confidence;
        matched = true;
      } else {
        if (e->confidence > 0) --e->confidence;
        e->stride = delta;
      }
      e->last_addr = addr;
      // issue only on a confirming delta; a stale stride right after a
      // discontinuity would otherwise prefetch unrelated lines
      if (matched && e->confidence >= 2) {
        for (uint64_t k = 1; k <= degree_; ++k) {
          uint64_t line = line_of(addr + uint64_t(int64_t(k) * e->stride));
          if (recently_issued(line)) continue;
          remember(line);
          out.push_back(line);
        }
      }
    } else {
      e->valid = true;
      e->pc = pc;
      e->last_addr = addr;
      e->stride = 0;
      e->confidence = 0;
    }
    touch(*e);
    return out;
  }

 private:
  struct Entry {
    bool valid = false;
    uint64_t pc = 0;
    uint64_t last_addr = 0;
    int64_t stride = 0;
    bool has_stride = false;
    uint8_t confidence = 0;
    uint64_t lru = 0;
  };

  static constexpr size_t kRecent = 32;

  Entry* lookup_or_alloc(uint64_t pc) {
    Entry* victim = &table_[0];
    for (auto& e : table_) {
      if (e.valid && e.pc == pc) return &e;
      if (!e.valid) {
        victim = &e;
      } else if (victim->valid && e.lru < victim->lru) {
        victim = &e;
      }
    }
    *victim = Entry{};
    return victim;
  }

  void touch(Entry& e) { e.lru = ++clock_; }

  bool recently_issued(uint64_t line) const {
    for (uint64_t r : recent_)
      if (r == line) return true;
    return false;
  }

  void remember(uint64_t line) {
    recent_[recent_pos_] = line;
    recent_pos_ = (recent_pos_ + 1) % kRecent;
  }

  uint64_t degree_;
  uint64_t entries_;
  std::vector<Entry> table_;
  std::vector<uint64_t> recent_;
  size_t recent_pos_ = 0;
  uint64_t clock_ = 0;
};

}  // namespace icp
