#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "icp/config.hpp"
#include "icp/types.hpp"

namespace icp {

enum CandidateFlags : uint8_t {
  kCandNone = 0,
  kCandPreF = 1 << 0,       // basic-prefetcher-friendly producer
  kCandPreNfSuc = 1 << 1,   // single field: PC_pre^nf and PC_suc jointly
};

struct CandidateEntry {
  uint64_t pc = 0;
  uint8_t flags = kCandNone;
  CacheLevel level = CacheLevel::L1;
  uint64_t count = 0;  // dependency-tree construction attempts
  uint64_t inserted_at = 0;
  uint64_t epoch_seen = 0;
  bool valid = false;
};

struct SampleEntry {
  uint64_t pc = 0;
  uint64_t pf_hits = 0;
  uint64_t demand_misses = 0;
  uint64_t lru = 0;
  bool valid = false;
};

// PC Selector and Classifier: per-level Sample Tables with epoch-based
// export of S_suc, S_pre^f and S_pre^nf into a compressed Candidate Table.
class Selector {
 public:
  explicit Selector(const SimConfig& cfg) : cfg_(cfg) {
    for (auto& lvl : levels_) {
      lvl.sample.resize(cfg.icp_sample);
      lvl.cand.resize(cfg.icp_cand);
    }
  }

  // One demand observation at the given level; runs end_epoch every
  // icp.epoch observations per level.
  void observe_demand(CacheLevel level, uint64_t pc, bool prefetch_hit,
                      bool demand_miss) {
    PerLevel& L = at(level);
    SampleEntry& e = lookup_or_alloc(L, pc);
    if (prefetch_hit) ++e.pf_hits;
    if (demand_miss) ++e.demand_misses;
    e.lru = ++L.clock;
    if (++L.epoch_accesses >= cfg_.icp_epoch) {
      end_epoch(level);
      L.epoch_accesses = 0;
    }
  }

  // Eq. 1: S_suc = top-n by demand misses among misses >= theta_miss.
  // Eq. 2: S_pre^f = top-n by coverage among Cov >= theta_cov.
  // Eq. 3: S_pre^nf = S_suc. Ties break toward the lower PC.
  void end_epoch(CacheLevel level) {
    PerLevel& L = at(level);
    ++L.epoch_id;
    std::vector<const SampleEntry*> snap;
    for (const auto& e : L.sample)
      if (e.valid) snap.push_back(&e);

    std::vector<const SampleEntry*> suc;
    for (const auto* e : snap)
      if (e->demand_misses >= cfg_.icp_theta_miss) suc.push_back(e);
    std::sort(suc.begin(), suc.end(), [](const SampleEntry* a, const SampleEntry* b) {
      if (a->demand_misses != b->demand_misses)
        return a->demand_misses > b->demand_misses;
      return a->pc < b->pc;
    });
    if (suc.size() > cfg_.icp_n) suc.resize(cfg_.icp_n);

    auto cov = [](const SampleEntry* e) {
      uint64_t d = e->pf_hits + e->demand_misses;
      return d == 0 ? 0.0 : double(e->pf_hits) / double(d);
    };
    std::vector<const SampleEntry*> pref;
    for (const auto* e : snap)
      if (cov(e) >= cfg_.icp_theta_cov && e->pf_hits > 0) pref.push_back(e);
    std::sort(pref.begin(), pref.end(),
              [&](const SampleEntry* a, const SampleEntry* b) {
                double ca = cov(a), cb = cov(b);
                if (ca != cb) return ca > cb;
                return a->pc < b->pc;
              });
    if (pref.size() > cfg_.icp_n) pref.resize(cfg_.icp_n);

    for (const auto* e : suc) export_candidate(L, level, e->pc, kCandPreNfSuc);
    for (const auto* e : pref) export_candidate(L, level, e->pc, kCandPreF);

    for (auto& e : L.sample) e = SampleEntry{};
  }

  uint8_t classify(uint64_t pc, CacheLevel level) const {
    const PerLevel& L = at(level);
    for (const auto& e : L.cand)
      if (e.valid && e.pc == pc) return e.flags;
    return kCandNone;
  }

  CandidateEntry* candidate(uint64_t pc, CacheLevel level) {
    PerLevel& L = at(level);
    for (auto& e : L.cand)
      if (e.valid && e.pc == pc) return &e;
    return nullptr;
  }

  const std::vector<CandidateEntry>& candidates(CacheLevel level) const {
    return at(level).cand;
  }

  const std::vector<SampleEntry>& sample_table(CacheLevel level) const {
    return at(level).sample;
  }

 private:
  struct PerLevel {
    std::vector<SampleEntry> sample;
    std::vector<CandidateEntry> cand;
    uint64_t epoch_accesses = 0;
    uint64_t clock = 0;
    uint64_t insert_seq = 0;
    uint64_t epoch_id = 0;
  };

  PerLevel& at(CacheLevel level) { return levels_[level == CacheLevel::L1 ? 0 : 1]; }
  const PerLevel& at(CacheLevel level) const {
    return levels_[level == CacheLevel::L1 ? 0 : 1];
  }

  SampleEntry& lookup_or_alloc(PerLevel& L, uint64_t pc) {
    SampleEntry* victim = &L.sample[0];
    for (auto& e : L.sample) {
      if (e.valid && e.pc == pc) return e;
      if (!e.valid) {
        if (victim->valid) victim = &e;
      } else if (victim->valid && e.lru < victim->lru) {
        victim = &e;
      }
    }
    *victim = SampleEntry{};
    victim->valid = true;
    victim->pc = pc;
    return *victim;
  }

  // Re-selected PCs keep their attempt count; fresh selections evict the
  // oldest entry not selected in this epoch.
  void export_candidate(PerLevel& L, CacheLevel level, uint64_t pc, uint8_t flag) {
    for (auto& e : L.cand) {
      if (e.valid && e.pc == pc) {
        if (e.epoch_seen != L.epoch_id) {
          e.flags = flag;  // fresh epoch: replace stale attribute
          e.epoch_seen = L.epoch_id;
        } else {
          e.flags |= flag;  // selected by both equations this epoch
        }
        e.level = level;
        return;
      }
    }
    CandidateEntry* victim = nullptr;
    for (auto& e : L.cand) {
      if (!e.valid) {
        victim = &e;
        break;
      }
      if (e.epoch_seen == L.epoch_id) continue;  // selected this epoch
      if (!victim || e.inserted_at < victim->inserted_at) victim = &e;
    }
    if (!victim) return;  // table saturated with this epoch's selections
    *victim = CandidateEntry{};
    victim->valid = true;
    victim->pc = pc;
    victim->flags = flag;
    victim->level = level;
    victim->inserted_at = ++L.insert_seq;
    victim->epoch_seen = L.epoch_id;
  }

  SimConfig cfg_;
  std::array<PerLevel, 2> levels_;
};

}  // namespace icp
