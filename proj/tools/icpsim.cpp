// Experiment runner: workload generation, single runs, parameter sweeps and
// report inspection for the instruction-correlation prefetching simulator.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "icp/config.hpp"
#include "icp/metrics.hpp"
#include "icp/simulator.hpp"
#include "icp/trace_io.hpp"
#include "icp/workload.hpp"

namespace {

std::string sidecar_path(const std::string& trace_path) {
  auto dot = trace_path.find_last_of('.');
  auto slash = trace_path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return trace_path + ".mem";
  return trace_path.substr(0, dot) + ".mem";
}

void apply_set_flags(icp::SimConfig& cfg, const std::vector<std::string>& sets) {
  for (const auto& kv : sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw icp::ConfigParseError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
}

unsigned thread_cap() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ICP_SIM_THREADS")) {
    char* end = nullptr;
    unsigned long v = std::strtoul(env, &end, 10);
    if (end && *end == '\0' && v >= 1) return std::min<unsigned long>(v, hw);
  }
  return hw;
}

std::string hash_hex(uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"instruction-correlation prefetching simulator"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic workload trace");
  std::string gen_kernel, gen_out;
  icp::WorkloadSpec spec;
  gen->add_option("--kernel", gen_kernel, "kernel name")->required();
  gen->add_option("--elems", spec.element_count, "element count");
  gen->add_option("--iters", spec.iteration_count, "iteration count");
  gen->add_option("--seed", spec.rng_seed, "generator seed");
  gen->add_option("--other-density", spec.other_density,
                  "filler-instruction density");
  gen->add_option("-o,--out", gen_out, "output trace path")->required();

  // shared run/sweep options
  struct RunOpts {
    std::string config_path, trace_path, out_path;
    std::vector<std::string> sets;
    uint64_t seed = 0;
    bool have_seed = false;
    bool no_icp = false, no_stride = false;
    bool no_extractor = false, no_srcpred = false;
    bool no_demand = false, no_prefetch = false;
  };
  auto add_run_opts = [](CLI::App* cmd, RunOpts& o) {
    cmd->add_option("-c,--config", o.config_path, "config file (key=value)");
    cmd->add_option("--trace", o.trace_path, "input trace")->required();
    cmd->add_option("-o,--out", o.out_path, "report CSV path")->required();
    cmd->add_option("--set", o.sets, "override a config key (key=value)");
    cmd->add_option("--seed", o.seed, "run seed")->each([&o](const std::string&) {
      o.have_seed = true;
    });
    cmd->add_flag("--no-icp", o.no_icp, "disable the correlation prefetcher");
    cmd->add_flag("--no-stride", o.no_stride, "disable the stride baseline");
    cmd->add_flag("--icp.no_extractor", o.no_extractor,
                  "speculate on every line word");
    cmd->add_flag("--icp.no_srcpred", o.no_srcpred,
                  "abort chains needing an off-tree operand");
    cmd->add_flag("--icp.no_demand_trigger", o.no_demand,
                  "ignore demand fills");
    cmd->add_flag("--icp.no_prefetch_trigger", o.no_prefetch,
                  "ignore prefetch fills");
  };

  auto* run = app.add_subcommand("run", "simulate one trace");
  RunOpts ro;
  add_run_opts(run, ro);

  auto* sweep = app.add_subcommand("sweep", "run once per value of one key");
  RunOpts so;
  std::string sweep_key;
  std::vector<std::string> sweep_values;
  add_run_opts(sweep, so);
  sweep->add_option("--key", sweep_key, "config key to vary")->required();
  sweep->add_option("--values", sweep_values, "values to sweep")
      ->required()
      ->delimiter(',');

  auto* rep = app.add_subcommand("report", "summarize a report CSV");
  std::string rep_in;
  rep->add_option("-i,--in", rep_in, "report CSV")->required();

  CLI11_PARSE(app, argc, argv);

  auto build_cfg = [](const RunOpts& o) {
    icp::SimConfig cfg;
    if (!o.config_path.empty()) icp::parse_config_file(cfg, o.config_path);
    apply_set_flags(cfg, o.sets);
    if (o.have_seed) cfg.seed = o.seed;
    if (o.no_icp) cfg.icp_enabled = false;
    if (o.no_stride) cfg.stride_enabled = false;
    if (o.no_extractor) cfg.icp_no_extractor = true;
    if (o.no_srcpred) cfg.icp_no_srcpred = true;
    if (o.no_demand) cfg.icp_no_demand_trigger = true;
    if (o.no_prefetch) cfg.icp_no_prefetch_trigger = true;
    return cfg;
  };

  try {
    if (*gen) {
      auto kind = icp::kernel_from_name(gen_kernel);
      if (!kind) throw icp::ConfigError("unknown kernel '" + gen_kernel + "'");
      spec.kernel = *kind;
      icp::Workload w = icp::generate_workload(spec);
      icp::write_trace(w.trace, gen_out);
      icp::write_image(w.image, sidecar_path(gen_out));
      return 0;
    }

    if (*run) {
      icp::SimConfig cfg = build_cfg(ro);
      icp::Trace trace = icp::read_trace(ro.trace_path);
      icp::MemoryImage image = icp::read_image(sidecar_path(ro.trace_path));
      icp::RunReport r = icp::run_simulation(cfg, trace, image);
      icp::emit_report(r, ro.out_path);
      return 0;
    }

    if (*sweep) {
      if (!icp::is_known_config_key(sweep_key))
        throw icp::ConfigParseError("unknown sweep key '" + sweep_key + "'");
      icp::SimConfig base = build_cfg(so);
      icp::Trace trace = icp::read_trace(so.trace_path);
      icp::MemoryImage image = icp::read_image(sidecar_path(so.trace_path));

      std::vector<icp::SimConfig> cfgs;
      for (const auto& v : sweep_values) {
        icp::SimConfig c = base;
        c.set(sweep_key, v);
        cfgs.push_back(c);
      }

      std::vector<icp::RunReport> reports(cfgs.size());
      std::vector<std::string> errors(cfgs.size());
      const unsigned threads = std::min<size_t>(thread_cap(), cfgs.size());
      std::mutex next_mu;
      size_t next = 0;
      auto worker = [&]() {
        for (;;) {
          size_t i;
          {
            std::lock_guard<std::mutex> lk(next_mu);
            if (next >= cfgs.size()) return;
            i = next++;
          }
          try {
            reports[i] = icp::run_simulation(cfgs[i], trace, image);
          } catch (const std::exception& e) {
            errors[i] = e.what();
          }
        }
      };
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
      for (size_t i = 0; i < cfgs.size(); ++i)
        if (!errors[i].empty())
          throw std::runtime_error(sweep_key + "=" + sweep_values[i] + ": " +
                                   errors[i]);

      std::ofstream os(so.out_path, std::ios::binary);
      if (!os) throw std::runtime_error("cannot open for write: " + so.out_path);
      os << "group,metric,key,value\n";
      for (size_t i = 0; i < cfgs.size(); ++i) {
        const std::string group = hash_hex(cfgs[i].hash());
        os << group << ",config," << sweep_key << ',' << sweep_values[i] << '\n';
        icp::emit_report(reports[i], os, group, /*header=*/false);
      }
      return 0;
    }

    if (*rep) {
      std::ifstream is(rep_in);
      if (!is) throw std::runtime_error("cannot open report: " + rep_in);
      std::string line;
      if (!std::getline(is, line) ||
          (line != "metric,key,value" && line != "group,metric,key,value"))
        throw std::runtime_error("not a report CSV: " + rep_in);
      const bool grouped = line == "group,metric,key,value";
      while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string group, metric, key, value;
        if (grouped) std::getline(ls, group, ',');
        std::getline(ls, metric, ',');
        std::getline(ls, key, ',');
        std::getline(ls, value, ',');
        if (metric != "summary" && metric != "config" && metric != "storage")
          continue;
        if (grouped) std::cout << group << ' ';
        std::cout << metric << '.' << key << " = " << value << '\n';
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "icpsim: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
