#pragma once

#include <algorithm>
#include <cassert>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "icp/config.hpp"
#include "icp/pc_compress.hpp"
#include "icp/selector.hpp"
#include "icp/types.hpp"

namespace icp {

struct CorrSuccessor {
  bool valid = false;
  uint16_t corr_pc = 0;
  CompressedInst cinst;
  bool src_pred = false;
  uint8_t counter = 0;
};

struct CorrEntry {
  bool valid = false;
  uint16_t cpc = 0;
  bool friendly = false;
  CacheLevel level = CacheLevel::L1;
  std::array<CorrSuccessor, 2> succ;
};

// Set-associative (PC -> up to two successors) store. Indexed by the low
// bits of the compressed PC; a full set evicts the entry with the smallest
// summed successor counters, a full entry replaces the successor slot with
// the smallest counter.
class CorrelationTable {
 public:
  CorrelationTable(uint64_t entries, uint64_t ways)
      : ways_(ways), sets_(std::max<uint64_t>(entries / ways, 1)) {
    table_.assign(sets_ * ways_, CorrEntry{});
  }

  const CorrEntry* lookup(uint16_t cpc, bool count_access = true) {
    CorrEntry* e = find(cpc);
    if (e && count_access) ++accesses_;
    return e;
  }

  struct RecordOutcome {
    bool new_edge = false;       // successor slot newly filled or replaced
    bool became_friendly = false;  // entry is friendly and was not before
  };

  RecordOutcome record_edge(uint16_t pre_cpc, bool friendly, CacheLevel level,
                            uint16_t suc_cpc, CompressedInst cinst,
                            bool src_pred) {
    RecordOutcome out;
    CorrEntry* e = find(pre_cpc);
    if (!e) {
      e = allocate(pre_cpc, level);
      ++insertions_;
    }
    if (friendly && !e->friendly) {
      e->friendly = true;
      out.became_friendly = true;
    }
    CorrSuccessor* slot = nullptr;
    for (auto& s : e->succ)
      if (s.valid && s.corr_pc == suc_cpc) slot = &s;
    if (slot) {
      if (slot->counter < 255) ++slot->counter;
      slot->cinst = cinst;
      slot->src_pred = src_pred;
      return out;
    }
    for (auto& s : e->succ)
      if (!s.valid) {
        slot = &s;
        break;
      }
    if (!slot) {
      slot = &e->succ[0];
      for (auto& s : e->succ)
        if (s.counter < slot->counter) slot = &s;
    }
    slot->valid = true;
    slot->corr_pc = suc_cpc;
    slot->cinst = cinst;
    slot->src_pred = src_pred;
    slot->counter = 1;
    ++insertions_;
    out.new_edge = true;
    return out;
  }

  uint64_t insertions() const { return insertions_; }
  uint64_t accesses() const { return accesses_; }

  size_t occupied() const {
    size_t n = 0;
    for (const auto& e : table_)
      if (e.valid) ++n;
    return n;
  }

 private:
  CorrEntry* find(uint16_t cpc) {
    CorrEntry* base = &table_[set_of(cpc) * ways_];
    for (uint64_t w = 0; w < ways_; ++w)
      if (base[w].valid && base[w].cpc == cpc) return &base[w];
    return nullptr;
  }

  CorrEntry* allocate(uint16_t cpc, CacheLevel level) {
    CorrEntry* base = &table_[set_of(cpc) * ways_];
    CorrEntry* victim = nullptr;
    for (uint64_t w = 0; w < ways_; ++w)
      if (!base[w].valid) {
        victim = &base[w];
        break;
      }
    if (!victim) {
      auto weight = [](const CorrEntry& e) {
        uint64_t sum = 0;
        for (const auto& s : e.succ)
          if (s.valid) sum += s.counter;
        return sum;
      };
      victim = &base[0];
      for (uint64_t w = 1; w < ways_; ++w)
        if (weight(base[w]) < weight(*victim)) victim = &base[w];
    }
    *victim = CorrEntry{};
    victim->valid = true;
    victim->cpc = cpc;
    victim->level = level;
    return victim;
  }

  uint64_t set_of(uint16_t cpc) const { return cpc % sets_; }

  uint64_t ways_;
  uint64_t sets_;
  std::vector<CorrEntry> table_;
  uint64_t insertions_ = 0;
  uint64_t accesses_ = 0;
};

enum class NodeAttr : uint8_t { PreF, PreNf, Suc, Intermediate };

struct NodeEntry {
  uint8_t id = 0;
  std::optional<uint8_t> parent;
  uint64_t pc = 0;
  CompressedInst cinst;
  NodeAttr attr = NodeAttr::Intermediate;
  bool src_pred = false;      // an operand of this node lies off-tree
  RegisterId off_reg = 0;     // the off-tree register, valid iff src_pred
};

struct RecordedPath {
  std::vector<uint64_t> pcs;  // root .. successor, full PCs
  size_t length() const { return pcs.size() - 1; }
};

// PC Correlation Detector: consumes the commit stream, builds dependency
// trees rooted at PC_pre via the simplified O(N) renaming scheme, and
// records reconstructed (PC_pre, PC_suc) paths into the Correlation Table.
class Detector {
 public:
  using FriendlyHook = std::function<void(uint16_t cpc)>;
  using SrcPredHook = std::function<void(uint64_t pc, RegisterId reg)>;

  Detector(const SimConfig& cfg, Selector* sel, CorrelationTable* corr)
      : cfg_(cfg), sel_(sel), corr_(corr) {}

  void set_friendly_hook(FriendlyHook h) { on_friendly_ = std::move(h); }
  void set_srcpred_hook(SrcPredHook h) { on_srcpred_ = std::move(h); }

  void on_commit(const CommittedInstruction& in, uint64_t commit_idx) {
    if (!active_) {
      maybe_trigger(in);
      return;
    }
    ++instructions_seen_;
    step(in);
    if (instructions_seen_ >= cfg_.icp_commit_window ||
        nodes_.size() >= cfg_.icp_node_table)
      terminate(commit_idx);
  }

  // Terminate any in-progress construction (end of trace, tests).
  void flush(uint64_t commit_idx) {
    if (active_) terminate(commit_idx);
  }

  bool construction_active() const { return active_; }
  const std::vector<NodeEntry>& nodes() const { return nodes_; }

  // stats
  uint64_t constructions = 0;
  uint64_t blocked_requests = 0;
  uint64_t last_parent_derefs = 0;
  uint64_t max_parent_derefs = 0;
  uint64_t last_dfs_reads = 0;
  uint64_t max_dfs_reads = 0;
  uint64_t paths_over_depth_cap = 0;
  std::vector<RecordedPath> last_paths;
  std::vector<std::pair<uint64_t, uint64_t>> learning_curve;  // (instr, edges)
  std::map<uint64_t, uint64_t> path_length_histogram;

 private:
  void maybe_trigger(const CommittedInstruction& in) {
    if (in.op != OpClass::Load || !in.dst) return;
    CandidateEntry* ce = sel_->candidate(in.pc, CacheLevel::L1);
    if (!ce || !(ce->flags & (kCandPreF | kCandPreNfSuc)))
      ce = sel_->candidate(in.pc, CacheLevel::L2);
    if (!ce || !(ce->flags & (kCandPreF | kCandPreNfSuc))) return;
    if (ce->count >= cfg_.icp_count_limit) return;
    ++ce->count;
    ++constructions;

    active_ = true;
    level_ = ce->level;
    instructions_seen_ = 1;  // the trigger counts as instruction 1
    nodes_.clear();
    map_.fill(MapEntry{});

    NodeEntry root;
    root.id = 0;
    root.pc = in.pc;
    if (auto ci = compress_inst(in)) root.cinst = *ci;
    root.attr = (ce->flags & kCandPreF) ? NodeAttr::PreF : NodeAttr::PreNf;
    nodes_.push_back(root);
    map_[*in.dst] = MapEntry{true, 0};
  }

  void step(const CommittedInstruction& in) {
    if (active_ && classify_blocked(in)) ++blocked_requests;

    // 1. check source registers against the Produce Map
    std::optional<uint8_t> producer;
    std::optional<RegisterId> off_reg;
    for (RegisterId src : in.srcs) {
      const MapEntry& m = map_[src];
      if (m.valid && !producer) {
        producer = m.id;
      } else if (!map_[src].valid) {
        off_reg = src;
      }
    }

    std::optional<CompressedInst> ci;
    if (in.op != OpClass::Store) ci = compress_inst(in);

    if (producer && ci && in.dst && nodes_.size() < cfg_.icp_node_table) {
      // 2. append a dependent node
      NodeEntry n;
      n.id = uint8_t(nodes_.size());
      n.parent = *producer;
      n.pc = in.pc;
      n.cinst = *ci;
      n.attr = (sel_->classify(in.pc, level_) & kCandPreNfSuc)
                   ? NodeAttr::Suc
                   : NodeAttr::Intermediate;
      if (off_reg) {
        n.src_pred = true;
        n.off_reg = *off_reg;
      }
      nodes_.push_back(n);
      // 3. update Produce Map with the destination
      map_[*in.dst] = MapEntry{true, n.id};
    } else if (in.dst && map_[*in.dst].valid) {
      // 5. uncorrelated instruction overwrites a tracked register
      map_[*in.dst] = MapEntry{};
    }
  }

  bool classify_blocked(const CommittedInstruction& in) const {
    if (in.op != OpClass::Load || in.pc == nodes_.front().pc) return false;
    uint8_t f = sel_->classify(in.pc, CacheLevel::L1) |
                sel_->classify(in.pc, CacheLevel::L2);
    return (f & (kCandPreF | kCandPreNfSuc)) != 0;
  }

  void terminate(uint64_t commit_idx) {
    reconstruct_and_record(commit_idx);
    active_ = false;
    nodes_.clear();
    map_.fill(MapEntry{});
  }

  // Single linear scan for SUC nodes, then a parent-pointer walk per SUC
  // node. Both the raw dereference count and the memoized-DFS read count
  // are instrumented.
  void reconstruct_and_record(uint64_t commit_idx) {
    last_paths.clear();
    last_parent_derefs = 0;
    last_dfs_reads = nodes_.size();  // one read per node builds the child lists

    const NodeEntry& root = nodes_.front();
    const bool friendly_root = root.attr == NodeAttr::PreF;

    for (size_t i = 1; i < nodes_.size(); ++i) {
      if (nodes_[i].attr != NodeAttr::Suc) continue;
      std::vector<uint8_t> ids;
      uint8_t cur = uint8_t(i);
      ids.push_back(cur);
      while (cur != 0) {
        cur = *nodes_[cur].parent;
        ++last_parent_derefs;
        ids.push_back(cur);
      }
      std::reverse(ids.begin(), ids.end());
      const size_t depth = ids.size() - 1;
      if (depth > cfg_.icp_max_chain) {
        ++paths_over_depth_cap;
        continue;
      }
      for (size_t k = 0; k + 1 < ids.size(); ++k) {
        const NodeEntry& parent = nodes_[ids[k]];
        const NodeEntry& child = nodes_[ids[k + 1]];
        const uint16_t pre = compress_pc(parent.pc);
        const uint16_t suc = compress_pc(child.pc);
        auto out = corr_->record_edge(pre, k == 0 && friendly_root, level_,
                                      suc, child.cinst, child.src_pred);
        if (out.became_friendly && on_friendly_) on_friendly_(pre);
        if (out.new_edge && child.src_pred && on_srcpred_)
          on_srcpred_(child.pc, child.off_reg);
        if (distinct_edges_.insert({pre, suc}).second)
          learning_curve.emplace_back(commit_idx, distinct_edges_.size());
      }
      if (seen_pairs_.insert({root.pc, nodes_[i].pc}).second)
        ++path_length_histogram[depth];
      RecordedPath p;
      for (uint8_t id : ids) p.pcs.push_back(nodes_[id].pc);
      last_paths.push_back(std::move(p));
    }
    max_parent_derefs = std::max(max_parent_derefs, last_parent_derefs);
    max_dfs_reads = std::max(max_dfs_reads, last_dfs_reads);
  }

  struct MapEntry {
    bool valid = false;
    uint8_t id = 0;
  };

  SimConfig cfg_;
  Selector* sel_;
  CorrelationTable* corr_;
  FriendlyHook on_friendly_;
  SrcPredHook on_srcpred_;

  bool active_ = false;
  CacheLevel level_ = CacheLevel::L1;
  uint64_t instructions_seen_ = 0;
  std::vector<NodeEntry> nodes_;
  std::array<MapEntry, kNumRegisters> map_{};
  std::set<std::pair<uint16_t, uint16_t>> distinct_edges_;
  std::set<std::pair<uint64_t, uint64_t>> seen_pairs_;
};

}  // namespace icp
