#pragma once

#include <array>
#include <cassert>
#include <functional>
#include <optional>
#include <vector>

#include "icp/config.hpp"
#include "icp/memory_image.hpp"
#include "icp/metrics.hpp"
#include "icp/pc_compress.hpp"
#include "icp/types.hpp"

namespace icp {

// MSHR target extension carrying the compressed triggering PC back with the
// fill. The offset is valid for demand targets only.
struct MshrTarget {
  uint16_t compressed_pc : 10;
  uint16_t is_demand : 1;
  uint8_t demand_offset : 6;
};
static_assert(sizeof(MshrTarget) <= 4);

struct CacheConfig {
  uint64_t capacity_bytes;
  uint64_t ways;
  uint64_t hit_latency;
};

// Three-level data cache with per-line payloads and exact LRU. Timing is
// stall accounting: a demand miss charges the serialized latency of every
// traversed level. Inclusion is not enforced; each level fills independently.
class Hierarchy {
 public:
  struct LevelOutcome {
    bool accessed = false;
    bool hit = false;     // includes prefetch hits
    bool pf_hit = false;  // line's prefetched flag was set, now cleared
  };
  struct DemandResult {
    std::array<LevelOutcome, 3> level;
    uint64_t stall = 0;
  };
  using FillObserver = std::function<void(const CacheLineFill&)>;

  Hierarchy(const SimConfig& cfg, const MemoryImage* image,
            PrefetchAccounting* acct)
      : image_(image), acct_(acct), mem_lat_(cfg.mem_lat) {
    configure(0, {cfg.l1_kb * 1024, cfg.l1_ways, cfg.l1_lat});
    configure(1, {cfg.l2_kb * 1024, cfg.l2_ways, cfg.l2_lat});
    configure(2, {cfg.l3_kb * 1024, cfg.l3_ways, cfg.l3_lat});
  }

  void set_fill_observer(FillObserver f) { on_fill_ = std::move(f); }
  void set_now(uint64_t t) { now_ = t; }
  uint64_t now() const { return now_; }

  DemandResult demand_access(uint64_t addr, uint64_t pc, unsigned size) {
    assert(addr % size == 0);
    (void)size;
    const uint64_t line = line_of(addr);
    DemandResult res;
    int hit_level = -1;
    for (int lvl = 0; lvl < 3; ++lvl) {
      res.level[lvl].accessed = true;
      res.stall += levels_[lvl].cfg.hit_latency;
      Line* l = find(lvl, line);
      if (l) {
        res.level[lvl].hit = true;
        if (l->prefetched) {
          res.level[lvl].pf_hit = true;
          l->prefetched = false;
          OriginCounters& oc = acct_->of(l->origin);
          ++oc.useful;
          if (now_ >= l->complete_time) ++oc.useful_timely;
        }
        // line may be present but still in flight
        if (l->complete_time > now_ && l->complete_time - now_ > res.stall)
          res.stall = l->complete_time - now_;
        touch(*l);
        hit_level = lvl;
        break;
      }
      ++mshr_allocs_;
    }
    if (hit_level != 0) {
      if (hit_level < 0) res.stall += mem_lat_;
      const uint64_t complete = now_ + res.stall;
      const uint16_t cpc = compress_pc(pc);
      int deepest_missed = hit_level < 0 ? 2 : hit_level - 1;
      for (int lvl = deepest_missed; lvl >= 0; --lvl)
        install(lvl, line, /*prefetched=*/false, PrefetchOrigin::Stride, complete);
      // notify observers, deepest observed level first
      if (on_fill_) {
        for (int lvl = std::min(deepest_missed, 1); lvl >= 0; --lvl)
          emit_fill(CacheLevel(lvl), line, cpc, FillSource::Demand,
                    PrefetchOrigin::Stride, uint8_t(addr & (kLineSize - 1)));
      }
    }
    return res;
  }

  // Returns false (and counts a duplicate) when the line is already resident
  // at the target level.
  bool issue_prefetch(CacheLevel level, uint64_t line_addr, uint16_t cpc,
                      PrefetchOrigin origin,
                      std::optional<uint64_t> latency = std::nullopt) {
    assert(line_addr % kLineSize == 0);
    OriginCounters& oc = acct_->of(origin);
    ++oc.issued;
    int lvl = int(level);
    if (find(lvl, line_addr)) {
      ++oc.duplicates;
      return false;
    }
    install(lvl, line_addr, /*prefetched=*/true, origin,
            now_ + latency.value_or(mem_lat_));
    if (on_fill_ && lvl <= 1)
      emit_fill(level, line_addr, cpc, FillSource::Prefetch, origin, 0);
    return true;
  }

  bool resident(CacheLevel level, uint64_t line_addr) const {
    return const_cast<Hierarchy*>(this)->find(int(level), line_of(line_addr)) !=
           nullptr;
  }

  const std::array<uint8_t, kLineSize>* line_data(CacheLevel level,
                                                  uint64_t line_addr) {
    Line* l = find(int(level), line_of(line_addr));
    return l ? &l->data : nullptr;
  }

  // Classify still-pending prefetched lines as useless at end of run.
  void finalize() {
    for (auto& lc : levels_)
      for (auto& l : lc.lines)
        if (l.valid && l.prefetched) {
          ++acct_->of(l.origin).useless;
          l.prefetched = false;
        }
  }

  uint64_t mshr_allocations() const { return mshr_allocs_; }

 private:
  struct Line {
    uint64_t tag = 0;
    bool valid = false;
    bool prefetched = false;
    PrefetchOrigin origin = PrefetchOrigin::Stride;
    uint64_t lru = 0;
    uint64_t complete_time = 0;
    std::array<uint8_t, kLineSize> data{};
  };
  struct LevelCache {
    CacheConfig cfg;
    uint64_t sets = 0;
    std::vector<Line> lines;  // sets * ways
  };

  void configure(int lvl, CacheConfig cfg) {
    LevelCache& lc = levels_[lvl];
    lc.cfg = cfg;
    assert(cfg.capacity_bytes % (cfg.ways * kLineSize) == 0);
    lc.sets = cfg.capacity_bytes / (cfg.ways * kLineSize);
    lc.lines.assign(lc.sets * cfg.ways, Line{});
  }

  Line* find(int lvl, uint64_t line_addr) {
    LevelCache& lc = levels_[lvl];
    uint64_t set = (line_addr / kLineSize) % lc.sets;
    Line* base = &lc.lines[set * lc.cfg.ways];
    for (uint64_t w = 0; w < lc.cfg.ways; ++w)
      if (base[w].valid && base[w].tag == line_addr) return &base[w];
    return nullptr;
  }

  void touch(Line& l) { l.lru = ++lru_clock_; }

  void install(int lvl, uint64_t line_addr, bool prefetched,
               PrefetchOrigin origin, uint64_t complete_time) {
    LevelCache& lc = levels_[lvl];
    uint64_t set = (line_addr / kLineSize) % lc.sets;
    Line* base = &lc.lines[set * lc.cfg.ways];
    Line* victim = &base[0];
    for (uint64_t w = 0; w < lc.cfg.ways; ++w) {
      if (!base[w].valid) {
        victim = &base[w];
        break;
      }
      if (base[w].lru < victim->lru) victim = &base[w];
    }
    if (victim->valid && victim->prefetched)
      ++acct_->of(victim->origin).useless;
    victim->tag = line_addr;
    victim->valid = true;
    victim->prefetched = prefetched;
    victim->origin = origin;
    victim->complete_time = complete_time;
    victim->data = image_->read_line(line_addr);
    touch(*victim);
  }

  void emit_fill(CacheLevel level, uint64_t line_addr, uint16_t cpc,
                 FillSource source, PrefetchOrigin origin,
                 uint8_t demand_offset) {
    CacheLineFill f;
    f.line_addr = line_addr;
    f.data = image_->read_line(line_addr);
    f.compressed_pc = cpc;
    f.source = source;
    f.origin = origin;
    f.level = level;
    if (source == FillSource::Demand) f.demand_offset = demand_offset;
    on_fill_(f);
  }

  std::array<LevelCache, 3> levels_;
  const MemoryImage* image_;
  PrefetchAccounting* acct_;
  uint64_t mem_lat_;
  uint64_t now_ = 0;
  uint64_t lru_clock_ = 0;
  uint64_t mshr_allocs_ = 0;
  FillObserver on_fill_;
};

}  // namespace icp
