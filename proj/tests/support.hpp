#pragma once

// Shared helpers for the detector tests and the acceptance suite: tiny
// instruction builders, selector priming, and an independent dataflow
// oracle for dependency-path reconstruction.

#include <array>
#include <vector>

#include "icp/detector.hpp"
#include "icp/selector.hpp"
#include "icp/types.hpp"

namespace icp::testsupport {

inline CommittedInstruction make_load(uint64_t pc, RegisterId dst,
                                      RegisterId src, int64_t imm = 0,
                                      uint64_t addr = 0x1000,
                                      uint64_t value = 0) {
  CommittedInstruction in;
  in.pc = pc;
  in.op = OpClass::Load;
  in.dst = dst;
  in.srcs = {src};
  in.imm = imm;
  in.mem_addr = addr;
  in.mem_value = value;
  return in;
}

inline CommittedInstruction make_alu(uint64_t pc, AluKind kind, RegisterId dst,
                                     std::vector<RegisterId> srcs,
                                     int64_t imm = 0) {
  CommittedInstruction in;
  in.pc = pc;
  in.op = OpClass::Alu;
  in.alu = kind;
  in.dst = dst;
  in.srcs = std::move(srcs);
  in.imm = imm;
  return in;
}

inline CommittedInstruction make_other(uint64_t pc, RegisterId dst) {
  CommittedInstruction in;
  in.pc = pc;
  in.op = OpClass::Other;
  in.dst = dst;
  return in;
}

inline CommittedInstruction make_store(uint64_t pc, RegisterId addr_reg,
                                       RegisterId val_reg) {
  CommittedInstruction in;
  in.pc = pc;
  in.op = OpClass::Store;
  in.srcs = {addr_reg, val_reg};
  in.mem_addr = 0x2000;
  return in;
}

// Export the given PCs as irregular-target candidates (and thus producer
// candidates too) at the given level, highest priority first.
inline void prime_suc(Selector& sel, CacheLevel level,
                      const std::vector<uint64_t>& pcs) {
  int boost = int(pcs.size());
  for (uint64_t pc : pcs) {
    for (int i = 0; i < 20 + boost; ++i)
      sel.observe_demand(level, pc, false, true);
    --boost;
  }
  sel.end_epoch(level);
}

inline void prime_friendly(Selector& sel, CacheLevel level, uint64_t pc) {
  for (int i = 0; i < 20; ++i) sel.observe_demand(level, pc, true, false);
  for (int i = 0; i < 20; ++i) sel.observe_demand(level, pc, false, true);
  sel.end_epoch(level);
}

// Independent path oracle: architectural last-writer reachability over the
// window, restricted to encodable ops, with first-come node capacity and the
// recorder's depth cap. win[0] must be the triggering load.
inline std::vector<RecordedPath> oracle_paths(
    const std::vector<CommittedInstruction>& win, Selector& sel,
    CacheLevel level, const SimConfig& cfg) {
  struct ONode {
    int parent;
    uint64_t pc;
    bool suc;
  };
  std::vector<ONode> nodes;
  std::array<int, kNumRegisters> writer;
  writer.fill(-1);

  nodes.push_back({-1, win[0].pc, false});
  writer[*win[0].dst] = 0;

  const size_t limit = std::min<size_t>(win.size(), cfg.icp_commit_window);
  for (size_t i = 1; i < limit; ++i) {
    if (nodes.size() >= cfg.icp_node_table) break;
    const CommittedInstruction& in = win[i];
    int producer = -1;
    for (RegisterId src : in.srcs)
      if (writer[src] >= 0) {
        producer = writer[src];
        break;
      }
    const bool encodable =
        in.op != OpClass::Store && in.dst && compress_inst(in).has_value();
    if (producer >= 0 && encodable) {
      bool suc = (sel.classify(in.pc, level) & kCandPreNfSuc) != 0;
      nodes.push_back({producer, in.pc, suc});
      writer[*in.dst] = int(nodes.size()) - 1;
    } else if (in.dst) {
      writer[*in.dst] = -1;
    }
  }

  std::vector<RecordedPath> out;
  for (size_t i = 1; i < nodes.size(); ++i) {
    if (!nodes[i].suc) continue;
    std::vector<uint64_t> rev;
    for (int cur = int(i); cur >= 0; cur = nodes[cur].parent)
      rev.push_back(nodes[cur].pc);
    if (rev.size() - 1 > cfg.icp_max_chain) continue;
    RecordedPath p;
    p.pcs.assign(rev.rbegin(), rev.rend());
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace icp::testsupport
