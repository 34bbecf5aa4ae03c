#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "icp/cache.hpp"
#include "icp/config.hpp"
#include "icp/detector.hpp"
#include "icp/memory_image.hpp"
#include "icp/metrics.hpp"
#include "icp/prefetcher.hpp"
#include "icp/replay.hpp"
#include "icp/selector.hpp"
#include "icp/stride.hpp"
#include "icp/trace_io.hpp"

namespace icp {

// Perfect next-instance oracle used to estimate the attainable ceiling for
// one producer/consumer PC pair: when instance k of pre_pc commits, instance
// k+1 of suc_pc is installed in L1 with zero latency.
struct IdealOracle {
  uint64_t pre_pc = 0;
  uint64_t suc_pc = 0;
};

class Simulator {
 public:
  Simulator(const SimConfig& cfg, const Trace& trace, const MemoryImage& image)
      : cfg_(cfg),
        trace_(&trace),
        image_(image),
        selector(cfg),
        corr(cfg.icp_corr_entries, cfg.icp_corr_ways),
        detector(cfg, &selector, &corr),
        hier(cfg, &image_, &report.prefetch),
        stride(cfg),
        icp(cfg, &corr, &hier, &image_) {
    detector.set_friendly_hook(
        [this](uint16_t cpc) { icp.extractor.allocate(cpc); });
    detector.set_srcpred_hook([this](uint64_t pc, RegisterId reg) {
      icp.srcpred.allocate(pc, reg);
    });
    hier.set_fill_observer([this](const CacheLineFill& f) {
      if (cfg_.icp_enabled) icp.on_fill(f);
    });
  }

  void set_ideal(const IdealOracle& oracle) { ideal_ = oracle; }

  RunReport run() {
    std::vector<uint64_t> ideal_addrs;  // suc_pc demand addresses in order
    if (ideal_) {
      for (const auto& in : *trace_)
        if (in.pc == ideal_->suc_pc && in.mem_addr)
          ideal_addrs.push_back(*in.mem_addr);
    }
    uint64_t ideal_seen = 0;

    const uint64_t n = trace_->size();
    const uint64_t warmup = uint64_t(double(n) * cfg_.run_warmup_frac);
    uint64_t cycles = 0;

    for (uint64_t i = 0; i < n; ++i) {
      const CommittedInstruction& in = (*trace_)[i];
      cycles += 1;
      hier.set_now(cycles);

      if (cfg_.icp_enabled)
        icp.srcpred.observe(in.pc, [&](RegisterId r) {
          return rf_.has(r) ? std::optional(rf_.read(r)) : std::nullopt;
        });

      if (in.is_mem() && in.mem_addr) {
        const uint64_t addr = *in.mem_addr;
        auto res = hier.demand_access(addr, in.pc, in.mem_size);

        ++report.l1_accesses;
        const bool l1_miss = !res.level[0].hit;
        const bool l1_pf_hit = res.level[0].pf_hit;
        if (l1_miss) {
          ++report.l1_misses;
          ++report.l2_accesses;
          if (!res.level[1].hit) {
            ++report.l2_misses;
            if (!res.level[2].hit) ++report.l3_misses;
            ap_table.observe_miss(line_of(addr));
          }
        }

        PerPcCounters& pc_ctr = report.per_pc[in.pc];
        if (l1_miss) ++pc_ctr.demand_misses;
        if (l1_pf_hit) ++pc_ctr.pf_hits;
        if (l1_miss && i >= warmup) ++pc_ctr.misses_post_warmup;
        pc_ctr.stall_cycles += res.stall;

        if (cfg_.icp_enabled) {
          selector.observe_demand(CacheLevel::L1, in.pc, l1_pf_hit, l1_miss);
          if (l1_miss)
            selector.observe_demand(CacheLevel::L2, in.pc, res.level[1].pf_hit,
                                    !res.level[1].hit);
          icp.extractor.train(compress_pc(in.pc), uint8_t(addr % kLineSize));
        }

        if (cfg_.stride_enabled && in.op == OpClass::Load)
          for (uint64_t line : stride.train(in.pc, addr))
            hier.issue_prefetch(CacheLevel::L1, line, compress_pc(in.pc),
                                PrefetchOrigin::Stride);

        cycles += res.stall;
        report.stall_cycles += res.stall;
        hier.set_now(cycles);
      }

      if (cfg_.icp_enabled) detector.on_commit(in, i);

      if (ideal_ && in.pc == ideal_->pre_pc && in.op == OpClass::Load) {
        if (ideal_seen + 1 < ideal_addrs.size())
          hier.issue_prefetch(CacheLevel::L1,
                              line_of(ideal_addrs[ideal_seen + 1]),
                              compress_pc(ideal_->suc_pc),
                              PrefetchOrigin::Ideal, /*latency=*/0);
        ++ideal_seen;
      }

      replay_step(in, rf_, image_);
    }

    if (cfg_.icp_enabled) detector.flush(n);
    hier.finalize();

    report.instructions = n;
    report.cycles = cycles;
    report.icp_aborted = icp.aborted;
    report.icp_speculation_tasks = icp.speculation_tasks;
    report.metadata_insertions = corr.insertions();
    report.metadata_accesses = corr.accesses();
    report.ap_insertions = ap_table.insertions();
    report.ap_accesses = ap_table.accesses();
    report.constructions = detector.constructions;
    report.blocked_constructions = detector.blocked_requests;
    report.max_parent_derefs = detector.max_parent_derefs;
    report.max_dfs_reads = detector.max_dfs_reads;
    report.learning_curve = detector.learning_curve;
    report.path_length_histogram = detector.path_length_histogram;
    report.storage_bytes = storage_report(cfg_);
    return report;
  }

  RunReport report;
  Selector selector;
  CorrelationTable corr;
  Detector detector;
  Hierarchy hier;
  StridePrefetcher stride;
  IcpPrefetcher icp;
  AddressPairTable ap_table;

 private:
  SimConfig cfg_;
  const Trace* trace_;
  MemoryImage image_;  // mutated by replayed stores
  RegisterFile rf_;
  std::optional<IdealOracle> ideal_;
};

inline RunReport run_simulation(const SimConfig& cfg, const Trace& trace,
                                const MemoryImage& image) {
  Simulator sim(cfg, trace, image);
  return sim.run();
}

}  // namespace icp
