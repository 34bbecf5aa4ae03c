#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "icp/config.hpp"
#include "icp/types.hpp"

namespace icp {

struct OriginCounters {
  uint64_t issued = 0;
  uint64_t duplicates = 0;
  uint64_t useful = 0;
  uint64_t useful_timely = 0;
  uint64_t useless = 0;
};

struct PrefetchAccounting {
  OriginCounters stride, icp, ideal;

  OriginCounters& of(PrefetchOrigin o) {
    switch (o) {
      case PrefetchOrigin::Stride: return stride;
      case PrefetchOrigin::Icp: return icp;
      case PrefetchOrigin::Ideal: return ideal;
    }
    return stride;
  }
};

struct PerPcCounters {
  uint64_t demand_misses = 0;
  uint64_t pf_hits = 0;
  uint64_t misses_post_warmup = 0;
  uint64_t stall_cycles = 0;
};

// accesses / insertions with a zero-division guard.
inline double reuse_ratio(uint64_t insertions, uint64_t accesses) {
  return double(accesses) / double(std::max<uint64_t>(insertions, 1));
}

// Markov-1 next-miss recorder over the L2 miss line stream. Measurement
// instrument only; never issues prefetches.
class AddressPairTable {
 public:
  void observe_miss(uint64_t line_addr) {
    if (has_prev_) {
      auto [it, inserted] = pairs_.try_emplace(prev_, line_addr);
      if (!inserted && it->second == line_addr) {
        ++accesses_;
      } else {
        if (!inserted) it->second = line_addr;
        ++insertions_;
      }
    }
    prev_ = line_addr;
    has_prev_ = true;
  }

  uint64_t insertions() const { return insertions_; }
  uint64_t accesses() const { return accesses_; }
  uint64_t size() const { return pairs_.size(); }
  double ratio() const { return reuse_ratio(insertions_, accesses_); }

 private:
  std::unordered_map<uint64_t, uint64_t> pairs_;
  uint64_t prev_ = 0;
  bool has_prev_ = false;
  uint64_t insertions_ = 0;
  uint64_t accesses_ = 0;
};

struct RunReport {
  uint64_t instructions = 0;
  uint64_t l1_accesses = 0;
  uint64_t l1_misses = 0;
  uint64_t l2_accesses = 0;
  uint64_t l2_misses = 0;
  uint64_t l3_misses = 0;
  uint64_t stall_cycles = 0;
  uint64_t cycles = 0;

  PrefetchAccounting prefetch;
  uint64_t icp_aborted = 0;
  uint64_t icp_speculation_tasks = 0;

  uint64_t metadata_insertions = 0;  // Correlation Table
  uint64_t metadata_accesses = 0;
  uint64_t ap_insertions = 0;  // address-pair instrument
  uint64_t ap_accesses = 0;

  uint64_t constructions = 0;
  uint64_t blocked_constructions = 0;
  uint64_t max_parent_derefs = 0;  // per-reconstruction maximum, no memoization
  uint64_t max_dfs_reads = 0;      // per-reconstruction maximum, DFS route

  std::map<uint64_t, PerPcCounters> per_pc;  // keyed by full PC, L1 events
  // (instruction index, cumulative distinct correlation edges)
  std::vector<std::pair<uint64_t, uint64_t>> learning_curve;
  std::map<uint64_t, uint64_t> path_length_histogram;  // first-time (pre,suc) pairs
  std::map<std::string, uint64_t> storage_bytes;

  double icp_reuse_ratio() const {
    return reuse_ratio(metadata_insertions, metadata_accesses);
  }
  double ap_reuse_ratio() const { return reuse_ratio(ap_insertions, ap_accesses); }
  double coverage(uint64_t pc) const {
    auto it = per_pc.find(pc);
    if (it == per_pc.end()) return 0.0;
    uint64_t d = it->second.pf_hits + it->second.demand_misses;
    return d == 0 ? 0.0 : double(it->second.pf_hits) / double(d);
  }
  double timeliness() const {
    uint64_t u = prefetch.icp.useful;
    return u == 0 ? 0.0 : double(prefetch.icp.useful_timely) / double(u);
  }
};

// Byte counts computed from the configured table geometry.
inline std::map<std::string, uint64_t> storage_report(const SimConfig& cfg) {
  std::map<std::string, uint64_t> s;
  s["correlation_table"] = cfg.icp_corr_entries * 7;
  s["mshr_extension"] = cfg.mshr_n * cfg.mshr_targets * 10 / 8;
  // two cache levels each keep a sample and candidate instance
  s["sample_table"] = 2 * cfg.icp_sample * 1;
  s["candidate_table"] = uint64_t(2 * cfg.icp_cand * 3.875);
  // 10-bit tag + 8 byte-wide offset counters per extractor entry
  s["data_extractor"] = (cfg.icp_extractor * (10 + 8 * 8) + 7) / 8;
  s["source_predictor"] = uint64_t(cfg.icp_srcpred * 9.25);
  // node id link/pc/cinst/attr plus the 256-entry produce map
  s["node_table"] = cfg.icp_node_table * 10;
  s["produce_map"] = kNumRegisters * 1;
  return s;
}

namespace detail {

inline void report_row(std::ostream& os, const std::string& group,
                       const std::string& metric, const std::string& key,
                       const std::string& value) {
  if (!group.empty()) os << group << ',';
  os << metric << ',' << key << ',' << value << '\n';
}

inline std::string hex_pc(uint64_t pc) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "0x%llx", (unsigned long long)pc);
  return buf;
}

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

// Long-form rows: metric,key,value. When `group` is non-empty (sweep mode) a
// leading group column is added. Field ordering is fixed so identical runs
// produce byte-identical files.
inline void emit_report(const RunReport& r, std::ostream& os,
                        const std::string& group = "", bool header = true) {
  using detail::report_row;
  if (header) {
    if (!group.empty())
      os << "group,metric,key,value\n";
    else
      os << "metric,key,value\n";
  }
  auto row_u = [&](const std::string& m, const std::string& k, uint64_t v) {
    report_row(os, group, m, k, std::to_string(v));
  };
  auto row_d = [&](const std::string& m, const std::string& k, double v) {
    report_row(os, group, m, k, detail::fmt_double(v));
  };

  row_u("summary", "instructions", r.instructions);
  row_u("summary", "cycles", r.cycles);
  row_u("summary", "stall_cycles", r.stall_cycles);
  row_u("summary", "l1_accesses", r.l1_accesses);
  row_u("summary", "l1_misses", r.l1_misses);
  row_u("summary", "l2_accesses", r.l2_accesses);
  row_u("summary", "l2_misses", r.l2_misses);
  row_u("summary", "l3_misses", r.l3_misses);
  row_u("summary", "stride_issued", r.prefetch.stride.issued);
  row_u("summary", "stride_duplicates", r.prefetch.stride.duplicates);
  row_u("summary", "stride_useful", r.prefetch.stride.useful);
  row_u("summary", "stride_useless", r.prefetch.stride.useless);
  row_u("summary", "icp_issued", r.prefetch.icp.issued);
  row_u("summary", "icp_duplicates", r.prefetch.icp.duplicates);
  row_u("summary", "icp_useful", r.prefetch.icp.useful);
  row_u("summary", "icp_useful_timely", r.prefetch.icp.useful_timely);
  row_u("summary", "icp_useless", r.prefetch.icp.useless);
  row_u("summary", "icp_aborted", r.icp_aborted);
  row_u("summary", "icp_speculation_tasks", r.icp_speculation_tasks);
  row_u("summary", "metadata_insertions", r.metadata_insertions);
  row_u("summary", "metadata_accesses", r.metadata_accesses);
  row_d("summary", "icp_reuse_ratio", r.icp_reuse_ratio());
  row_u("summary", "ap_insertions", r.ap_insertions);
  row_u("summary", "ap_accesses", r.ap_accesses);
  row_d("summary", "ap_reuse_ratio", r.ap_reuse_ratio());
  row_u("summary", "constructions", r.constructions);
  row_u("summary", "blocked_constructions", r.blocked_constructions);
  row_u("summary", "max_parent_derefs", r.max_parent_derefs);
  row_u("summary", "max_dfs_reads", r.max_dfs_reads);
  row_d("summary", "icp_timeliness", r.timeliness());

  for (const auto& [name, bytes] : r.storage_bytes) row_u("storage", name, bytes);
  for (const auto& [pc, c] : r.per_pc)
    row_u("per_pc_demand_miss", detail::hex_pc(pc), c.demand_misses);
  for (const auto& [pc, c] : r.per_pc)
    row_u("per_pc_pf_hit", detail::hex_pc(pc), c.pf_hits);
  for (const auto& [pc, c] : r.per_pc)
    row_u("per_pc_miss_post_warmup", detail::hex_pc(pc), c.misses_post_warmup);
  for (const auto& [pc, c] : r.per_pc)
    row_u("per_pc_stall", detail::hex_pc(pc), c.stall_cycles);
  for (const auto& [idx, edges] : r.learning_curve)
    row_u("learning_curve", std::to_string(idx), edges);
  for (const auto& [len, count] : r.path_length_histogram)
    row_u("path_length_histogram", std::to_string(len), count);
}

inline void emit_report(const RunReport& r, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  emit_report(r, os);
}

}  // namespace icp
