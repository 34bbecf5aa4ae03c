// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// the process exits nonzero if any criterion fails.

#include <cstdarg>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "icp/simulator.hpp"
#include "icp/workload.hpp"
#include "support.hpp"

using namespace icp;
using namespace icp::testsupport;

namespace {

int failures = 0;
uint64_t g_max_deref = 0, g_max_dfs = 0;

void report(int n, const char* name, bool ok, const std::string& detail) {
  std::printf("criterion %2d %-24s %s  %s\n", n, name, ok ? "PASS" : "FAIL",
              detail.c_str());
  if (!ok) ++failures;
}

std::string fmt(const char* f, ...) {
  char buf[256];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

Workload make_kernel(KernelKind k, uint64_t elems, uint64_t iters,
                     uint64_t seed) {
  WorkloadSpec spec;
  spec.kernel = k;
  spec.element_count = elems;
  spec.iteration_count = iters;
  spec.rng_seed = seed;
  return generate_workload(spec);
}

// ---- criterion 1: detector vs dataflow-reachability oracle ----------------

void criterion_detector_oracle() {
  SimConfig cfg;
  std::mt19937_64 rng(2024);
  uint64_t windows = 0, mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Selector sel(cfg);
    CorrelationTable corr(cfg.icp_corr_entries, cfg.icp_corr_ways);
    Detector det(cfg, &sel, &corr);
    prime_suc(sel, CacheLevel::L1, {0x1000, 0x1008, 0x1010, 0x1018});

    std::vector<CommittedInstruction> win;
    win.push_back(make_load(0x1000, RegisterId(1), RegisterId(0)));
    size_t len = 2 + rng() % 127;
    for (size_t i = 1; i < len; ++i) {
      uint64_t pc = 0x1000 + 8 * (rng() % 10);
      RegisterId dst = RegisterId(rng() % 10);
      RegisterId s0 = RegisterId(rng() % 10);
      switch (rng() % 6) {
        case 0: win.push_back(make_load(pc, dst, s0)); break;
        case 1: win.push_back(make_other(pc, dst)); break;
        case 2: win.push_back(make_store(pc, s0, dst)); break;
        default: {
          AluKind k = AluKind(rng() % 7);
          int64_t imm = (rng() % 8 == 0) ? 100000 : int64_t(rng() % 128);
          std::vector<RegisterId> srcs = {s0};
          if (rng() % 2) srcs.push_back(RegisterId(rng() % 10));
          win.push_back(make_alu(pc, k, dst, srcs, imm));
        }
      }
    }

    for (size_t i = 0;
         i < win.size() && (i == 0 || det.construction_active()); ++i)
      det.on_commit(win[i], i);
    det.flush(win.size());

    auto expect = oracle_paths(win, sel, CacheLevel::L1, cfg);
    ++windows;
    bool same = det.last_paths.size() == expect.size();
    for (size_t i = 0; same && i < expect.size(); ++i)
      same = det.last_paths[i].pcs == expect[i].pcs;
    if (!same) ++mismatches;
  }
  report(1, "detector-oracle", mismatches == 0,
         fmt("%llu windows, %llu mismatches", (unsigned long long)windows,
             (unsigned long long)mismatches));
}

// ---- criterion 2: speculation soundness -----------------------------------

void criterion_soundness() {
  struct K {
    KernelKind kind;
    uint64_t elems;
  };
  const K kernels[] = {{KernelKind::NestedArray, 4096},
                       {KernelKind::PointerChase, 4096},
                       {KernelKind::ArrayOfPointers, 2048},
                       {KernelKind::NestedPointer3, 512}};
  uint64_t total = 0, wrong = 0;
  for (const K& k : kernels) {
    Workload w = make_kernel(k.kind, k.elems, 20000, 5);
    std::set<std::pair<uint16_t, uint64_t>> legal;
    for (const auto& in : w.trace)
      if (in.mem_addr) legal.insert({compress_pc(in.pc), *in.mem_addr});
    SimConfig cfg;
    Simulator sim(cfg, w.trace, w.image);
    sim.icp.keep_issued_log = true;
    sim.run();
    for (const auto& [cpc, addr] : sim.icp.issued_log) {
      ++total;
      if (!legal.count({cpc, addr})) ++wrong;
    }
  }
  report(2, "speculation-soundness", total > 0 && wrong == 0,
         fmt("%llu prefetch addresses checked, %llu outside the replay set",
             (unsigned long long)total, (unsigned long long)wrong));
}

// ---- criterion 3: benefit vs baseline and ideal ceiling --------------------

void criterion_benefit() {
  Workload w = make_kernel(KernelKind::NestedArray, 1 << 16, 1 << 16, 5);
  SimConfig cfg;

  RunReport with = run_simulation(cfg, w.trace, w.image);
  SimConfig base_cfg = cfg;
  base_cfg.icp_enabled = false;
  RunReport base = run_simulation(base_cfg, w.trace, w.image);
  Simulator ideal_sim(base_cfg, w.trace, w.image);
  ideal_sim.set_ideal({w.pcs.inner_load, w.pcs.outer_load});
  RunReport ideal = ideal_sim.run();

  double m_base = double(base.per_pc.at(w.pcs.outer_load).misses_post_warmup);
  double m_icp = double(with.per_pc.at(w.pcs.outer_load).misses_post_warmup);
  double m_ideal = double(ideal.per_pc.at(w.pcs.outer_load).misses_post_warmup);
  double red = 1.0 - m_icp / m_base;
  double ceiling = 1.0 - m_ideal / m_base;
  bool ok = red >= 0.5 && red >= 0.8 * ceiling - 0.05;
  report(3, "benefit-vs-ceiling", ok,
         fmt("reduction %.1f%%, ideal ceiling %.1f%%", 100 * red,
             100 * ceiling));
}

// ---- criteria 4/5/6/8: properties over full runs of every kernel ----------

void criteria_run_properties() {
  bool learn_ok = true;
  std::string learn_detail;
  std::map<uint64_t, uint64_t> hist;
  uint64_t max_deref = 0, max_dfs = 0;
  double contrast = 0;

  for (KernelKind k :
       {KernelKind::NestedArray, KernelKind::PointerChase,
        KernelKind::ArrayOfPointers, KernelKind::NestedPointer3,
        KernelKind::ConditionalIndirect}) {
    Workload w = make_kernel(k, k == KernelKind::NestedPointer3 ? 512 : 4096,
                             60000, 5);
    SimConfig cfg;
    RunReport r = run_simulation(cfg, w.trace, w.image);

    if (r.learning_curve.empty()) {
      learn_ok = false;
      learn_detail += fmt("%s: no edges; ", kernel_name(k));
    } else {
      uint64_t last = r.learning_curve.back().first;
      if (double(last) > 0.10 * double(r.instructions)) {
        learn_ok = false;
        learn_detail += fmt("%s: last edge at %.1f%%; ", kernel_name(k),
                            100.0 * double(last) / double(r.instructions));
      }
    }
    for (const auto& [len, n] : r.path_length_histogram) hist[len] += n;
    max_deref = std::max(max_deref, r.max_parent_derefs);
    max_dfs = std::max(max_dfs, r.max_dfs_reads);

    if (k == KernelKind::NestedArray) {
      double ap = std::max(r.ap_reuse_ratio(),
                           1.0 / double(std::max<uint64_t>(r.ap_insertions, 1)));
      contrast = r.icp_reuse_ratio() / ap;
    }
  }
  if (learn_detail.empty()) learn_detail = "all kernels within the first 10%";
  report(4, "learning-rate", learn_ok, learn_detail);

  uint64_t total = 0, short_paths = 0, max_len = 0;
  for (const auto& [len, n] : hist) {
    total += n;
    if (len <= 3) short_paths += n;
    max_len = std::max(max_len, len);
  }
  bool path_ok = total > 0 && short_paths * 10 >= total * 7 && max_len <= 13;
  report(5, "path-lengths", path_ok,
         fmt("%.1f%% of %llu paths at length <= 3, max %llu",
             total ? 100.0 * double(short_paths) / double(total) : 0.0,
             (unsigned long long)total, (unsigned long long)max_len));

  report(6, "reuse-contrast", contrast >= 1e3,
         fmt("edge reuse / address-pair reuse = %.3g", contrast));

  g_max_deref = max_deref;
  g_max_dfs = max_dfs;
}

void criterion_traversal_cost() {
  bool cost_ok = g_max_deref <= 120 && g_max_dfs <= 16;
  report(8, "traversal-cost", cost_ok,
         fmt("max %llu parent derefs (<=120), max %llu dfs reads (<=16)",
             (unsigned long long)g_max_deref, (unsigned long long)g_max_dfs));
}

// ---- criterion 7: storage ---------------------------------------------------

void criterion_storage() {
  auto s = storage_report(SimConfig{});
  bool ok = s.at("correlation_table") == 448 && s.at("mshr_extension") == 160;
  report(7, "storage-bytes", ok,
         fmt("correlation table %llu B, mshr extension %llu B",
             (unsigned long long)s.at("correlation_table"),
             (unsigned long long)s.at("mshr_extension")));
}

// ---- criterion 9: ablation directions --------------------------------------

void criterion_ablations() {
  Workload w = make_kernel(KernelKind::NestedArray, 4096, 20000, 5);
  SimConfig cfg;
  RunReport def = run_simulation(cfg, w.trace, w.image);
  auto accuracy = [](const RunReport& r) {
    return r.prefetch.icp.issued == 0
               ? 0.0
               : double(r.prefetch.icp.useful) / double(r.prefetch.icp.issued);
  };

  SimConfig c1 = cfg;
  c1.icp_no_extractor = true;
  RunReport noex = run_simulation(c1, w.trace, w.image);
  bool ok1 = noex.prefetch.icp.issued >= def.prefetch.icp.issued &&
             accuracy(noex) <= accuracy(def);

  SimConfig c2 = cfg;
  c2.icp_no_srcpred = true;
  RunReport nosp = run_simulation(c2, w.trace, w.image);
  bool ok2 = nosp.icp_aborted >= 1;

  SimConfig c3 = cfg;
  c3.icp_no_prefetch_trigger = true;
  RunReport nopf = run_simulation(c3, w.trace, w.image);
  bool ok3 = nopf.timeliness() <= def.timeliness();

  report(9, "ablation-directions", ok1 && ok2 && ok3,
         fmt("issued %llu>=%llu acc %.3f<=%.3f; aborts %llu; "
             "timeliness %.3f<=%.3f",
             (unsigned long long)noex.prefetch.icp.issued,
             (unsigned long long)def.prefetch.icp.issued, accuracy(noex),
             accuracy(def), (unsigned long long)nosp.icp_aborted,
             nopf.timeliness(), def.timeliness()));
}

// ---- criterion 10: determinism ---------------------------------------------

void criterion_determinism() {
  Workload w = make_kernel(KernelKind::ArrayOfPointers, 2048, 15000, 9);
  SimConfig cfg;
  std::stringstream a, b;
  emit_report(run_simulation(cfg, w.trace, w.image), a);
  emit_report(run_simulation(cfg, w.trace, w.image), b);
  bool run_ok = a.str() == b.str();

  auto sweep_once = [&]() {
    std::stringstream out;
    for (uint64_t entries : {8, 32, 128}) {
      SimConfig c = cfg;
      c.icp_corr_entries = entries;
      emit_report(run_simulation(c, w.trace, w.image), out,
                  std::to_string(c.hash()), false);
    }
    return out.str();
  };
  bool sweep_ok = sweep_once() == sweep_once();
  report(10, "determinism", run_ok && sweep_ok,
         fmt("run %s, sweep %s", run_ok ? "identical" : "differs",
             sweep_ok ? "identical" : "differs"));
}

}  // namespace

int main() {
  criterion_detector_oracle();
  criterion_soundness();
  criterion_benefit();
  criteria_run_properties();
  criterion_storage();
  criterion_traversal_cost();
  criterion_ablations();
  criterion_determinism();
  if (failures) std::printf("%d criterion(s) FAILED\n", failures);
  return failures ? 1 : 0;
}
