#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "icp/cache.hpp"
#include "icp/config.hpp"
#include "icp/detector.hpp"
#include "icp/memory_image.hpp"
#include "icp/pc_compress.hpp"
#include "icp/types.hpp"

namespace icp {

// Data Extractor: per tracked PC a histogram of demand line offsets. An
// entry is allocated when the PC enters the Correlation Table as
// basic-prefetcher-friendly; offsets whose share of the total reaches the
// threshold are extracted from arriving prefetch fills.
class Extractor {
 public:
  explicit Extractor(const SimConfig& cfg)
      : entries_(cfg.icp_extractor), threshold_(cfg.icp_extract_threshold) {
    table_.resize(entries_);
  }

  void allocate(uint16_t cpc) {
    if (find(cpc)) return;
    Entry* victim = &table_[0];
    for (auto& e : table_) {
      if (!e.valid) {
        victim = &e;
        break;
      }
      if (e.lru < victim->lru) victim = &e;
    }
    *victim = Entry{};
    victim->valid = true;
    victim->cpc = cpc;
    victim->lru = ++clock_;
  }

  void train(uint16_t cpc, uint8_t byte_offset) {
    Entry* e = find(cpc);
    if (!e) return;
    uint8_t& c = e->counts[byte_offset / kWordSize];
    if (++c == 255)
      for (auto& x : e->counts) x /= 2;
    e->lru = ++clock_;
  }

  // Word offsets whose probability reaches the threshold; empty when the PC
  // is untracked or untrained.
  std::vector<unsigned> query(uint16_t cpc) {
    std::vector<unsigned> out;
    Entry* e = find(cpc);
    if (!e) return out;
    uint64_t total = 0;
    for (uint8_t c : e->counts) total += c;
    if (total == 0) return out;
    for (unsigned w = 0; w < kWordsPerLine; ++w)
      if (double(e->counts[w]) / double(total) >= threshold_) out.push_back(w);
    e->lru = ++clock_;
    return out;
  }

  bool tracked(uint16_t cpc) { return find(cpc) != nullptr; }

 private:
  struct Entry {
    bool valid = false;
    uint16_t cpc = 0;
    std::array<uint8_t, kWordsPerLine> counts{};
    uint64_t lru = 0;
  };

  Entry* find(uint16_t cpc) {
    for (auto& e : table_)
      if (e.valid && e.cpc == cpc) return &e;
    return nullptr;
  }

  uint64_t entries_;
  double threshold_;
  std::vector<Entry> table_;
  uint64_t clock_ = 0;
};

// Source Predictor: last value plus one confidence bit for the off-tree
// operand of instructions flagged Src Pred.
class SourcePredictor {
 public:
  explicit SourcePredictor(const SimConfig& cfg) : entries_(cfg.icp_srcpred) {
    table_.resize(entries_);
  }

  void allocate(uint64_t pc, RegisterId reg) {
    for (auto& e : table_)
      if (e.valid && e.pc == pc && e.reg == reg) return;
    Entry* victim = &table_[0];
    for (auto& e : table_) {
      if (!e.valid) {
        victim = &e;
        break;
      }
      if (e.lru < victim->lru) victim = &e;
    }
    *victim = Entry{};
    victim->valid = true;
    victim->pc = pc;
    victim->reg = reg;
    victim->lru = ++clock_;
  }

  // Called at commit of a matching PC with the operand's pre-execution value.
  template <class ReadReg>
  void observe(uint64_t pc, ReadReg&& read_reg) {
    for (auto& e : table_) {
      if (!e.valid || e.pc != pc) continue;
      std::optional<uint64_t> v = read_reg(e.reg);
      if (!v) continue;
      e.confident = e.has_value && e.value == *v;
      e.value = *v;
      e.has_value = true;
      e.lru = ++clock_;
    }
  }

  std::optional<uint64_t> predict(uint16_t cpc) {
    for (auto& e : table_) {
      if (!e.valid || compress_pc(e.pc) != cpc) continue;
      e.lru = ++clock_;
      if (e.confident) return e.value;
      return std::nullopt;
    }
    return std::nullopt;
  }

 private:
  struct Entry {
    bool valid = false;
    uint64_t pc = 0;
    RegisterId reg = 0;
    uint64_t value = 0;
    bool has_value = false;
    bool confident = false;
    uint64_t lru = 0;
  };

  uint64_t entries_;
  std::vector<Entry> table_;
  uint64_t clock_ = 0;
};

// One arithmetic hop of the speculative chain. Shifts use the low 6 bits of
// the operand; everything wraps.
inline uint64_t calc_step(CInstKind kind, uint64_t value, uint64_t operand) {
  switch (kind) {
    case CInstKind::Add: return value + operand;
    case CInstKind::Sub: return value - operand;
    case CInstKind::Shl: return value << (operand & 63);
    case CInstKind::Shr: return value >> (operand & 63);
    case CInstKind::And: return value & operand;
    case CInstKind::Or: return value | operand;
    case CInstKind::Xor: return value ^ operand;
    case CInstKind::Load: break;
  }
  return value;
}

// Runtime speculation engine: consumes cache line fills, extracts candidate
// source values, and walks the Correlation Table issuing chained prefetches.
class IcpPrefetcher {
 public:
  IcpPrefetcher(const SimConfig& cfg, CorrelationTable* corr, Hierarchy* hier,
                const MemoryImage* image)
      : cfg_(cfg),
        corr_(corr),
        hier_(hier),
        image_(image),
        extractor(cfg),
        srcpred(cfg) {}

  void on_fill(const CacheLineFill& f) {
    // chained fills are continued explicitly inside walk(), not re-triggered
    if (f.source == FillSource::Prefetch && f.origin != PrefetchOrigin::Stride)
      return;
    const CorrEntry* root = corr_->lookup(f.compressed_pc);
    if (!root) return;
    // a miss fills several levels; speculate once, at the learned level
    if (root->level != f.level) return;

    std::vector<unsigned> words;
    if (f.source == FillSource::Demand) {
      if (cfg_.icp_no_demand_trigger || !f.demand_offset) return;
      words.push_back(*f.demand_offset / kWordSize);
    } else {
      if (cfg_.icp_no_prefetch_trigger || !root->friendly) return;
      if (cfg_.icp_no_extractor) {
        for (unsigned w = 0; w < kWordsPerLine; ++w) words.push_back(w);
      } else {
        words = extractor.query(f.compressed_pc);
      }
    }
    if (words.empty()) return;

    ++speculation_tasks;
    uint64_t budget = cfg_.icp_fanout_cap;
    for (unsigned w : words) {
      uint64_t value = 0;
      for (unsigned b = 0; b < kWordSize; ++b)
        value |= uint64_t(f.data[w * kWordSize + b]) << (8 * b);
      walk(root, value, f.source == FillSource::Demand, 1, budget);
    }
  }

  Extractor extractor;
  SourcePredictor srcpred;

  uint64_t aborted = 0;
  uint64_t speculation_tasks = 0;
  // every non-aborted load prefetch as (successor compressed PC, address)
  std::vector<std::pair<uint16_t, uint64_t>> issued_log;
  bool keep_issued_log = false;

 private:
  void walk(const CorrEntry* entry, uint64_t value, bool demand_root,
            uint64_t depth, uint64_t& budget) {
    if (depth > cfg_.icp_max_chain) return;
    for (const auto& s : entry->succ) {
      if (!s.valid) continue;
      if (s.cinst.kind == CInstKind::Load) {
        if (budget == 0) return;
        uint64_t addr = value + uint64_t(int64_t(s.cinst.imm8));
        CacheLevel target = demand_root ? CacheLevel::L3 : entry->level;
        --budget;
        hier_->issue_prefetch(target, line_of(addr), s.corr_pc,
                              PrefetchOrigin::Icp);
        if (keep_issued_log) issued_log.emplace_back(s.corr_pc, addr);
        const CorrEntry* next = corr_->lookup(s.corr_pc);
        if (next)
          walk(next, image_->read_word(addr & ~uint64_t(kWordSize - 1)),
               demand_root, depth + 1, budget);
      } else {
        uint64_t operand;
        if (s.src_pred) {
          if (cfg_.icp_no_srcpred) {
            ++aborted;
            continue;
          }
          auto p = srcpred.predict(s.corr_pc);
          if (!p) {
            ++aborted;
            continue;
          }
          operand = *p;
        } else {
          operand = uint64_t(int64_t(s.cinst.imm8));
        }
        uint64_t nv = calc_step(s.cinst.kind, value, operand);
        const CorrEntry* next = corr_->lookup(s.corr_pc);
        if (next) walk(next, nv, demand_root, depth + 1, budget);
      }
    }
  }

  SimConfig cfg_;
  CorrelationTable* corr_;
  Hierarchy* hier_;
  const MemoryImage* image_;
};

}  // namespace icp
