#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace icp {

struct ConfigParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Simulation parameters. Key names mirror the config-file keys.
struct SimConfig {
  // memory hierarchy
  uint64_t l1_kb = 64, l1_ways = 4, l1_lat = 2;
  uint64_t l2_kb = 512, l2_ways = 8, l2_lat = 9;
  uint64_t l3_kb = 2048, l3_ways = 16, l3_lat = 20;
  uint64_t mem_lat = 200;
  uint64_t mshr_n = 16, mshr_targets = 8;
  // stride baseline
  uint64_t stride_degree = 4, stride_entries = 64;
  // selector / classifier
  uint64_t icp_epoch = 4096, icp_n = 4, icp_theta_miss = 16;
  double icp_theta_cov = 0.1;
  uint64_t icp_sample = 64, icp_cand = 8, icp_count_limit = 8;
  // detector
  uint64_t icp_node_table = 16, icp_commit_window = 128;
  uint64_t icp_corr_entries = 64, icp_corr_ways = 4, icp_max_chain = 13;
  // prefetcher
  uint64_t icp_extractor = 32;
  double icp_extract_threshold = 0.1;
  uint64_t icp_srcpred = 8, icp_fanout_cap = 8;
  // ablation switches
  bool icp_no_extractor = false;
  bool icp_no_srcpred = false;
  bool icp_no_demand_trigger = false;
  bool icp_no_prefetch_trigger = false;
  // run control
  bool stride_enabled = true;
  bool icp_enabled = true;
  double run_warmup_frac = 0.1;
  uint64_t seed = 1;

  void set(const std::string& key, const std::string& value);
  std::string canonical() const;
  uint64_t hash() const;
};

namespace detail {

template <class T>
struct KeyBinding {
  const char* name;
  T SimConfig::* field;
};

inline constexpr KeyBinding<uint64_t> kUintKeys[] = {
    {"l1.kb", &SimConfig::l1_kb},
    {"l1.ways", &SimConfig::l1_ways},
    {"l1.lat", &SimConfig::l1_lat},
    {"l2.kb", &SimConfig::l2_kb},
    {"l2.ways", &SimConfig::l2_ways},
    {"l2.lat", &SimConfig::l2_lat},
    {"l3.kb", &SimConfig::l3_kb},
    {"l3.ways", &SimConfig::l3_ways},
    {"l3.lat", &SimConfig::l3_lat},
    {"mem.lat", &SimConfig::mem_lat},
    {"mshr.n", &SimConfig::mshr_n},
    {"mshr.targets", &SimConfig::mshr_targets},
    {"stride.degree", &SimConfig::stride_degree},
    {"stride.entries", &SimConfig::stride_entries},
    {"icp.epoch", &SimConfig::icp_epoch},
    {"icp.n", &SimConfig::icp_n},
    {"icp.theta_miss", &SimConfig::icp_theta_miss},
    {"icp.sample", &SimConfig::icp_sample},
    {"icp.cand", &SimConfig::icp_cand},
    {"icp.count_limit", &SimConfig::icp_count_limit},
    {"icp.node_table", &SimConfig::icp_node_table},
    {"icp.commit_window", &SimConfig::icp_commit_window},
    {"icp.corr_entries", &SimConfig::icp_corr_entries},
    {"icp.corr_ways", &SimConfig::icp_corr_ways},
    {"icp.max_chain", &SimConfig::icp_max_chain},
    {"icp.extractor", &SimConfig::icp_extractor},
    {"icp.srcpred", &SimConfig::icp_srcpred},
    {"icp.fanout_cap", &SimConfig::icp_fanout_cap},
    {"seed", &SimConfig::seed},
};

inline constexpr KeyBinding<double> kDoubleKeys[] = {
    {"icp.theta_cov", &SimConfig::icp_theta_cov},
    {"icp.extract_threshold", &SimConfig::icp_extract_threshold},
    {"run.warmup_frac", &SimConfig::run_warmup_frac},
};

inline constexpr KeyBinding<bool> kBoolKeys[] = {
    {"icp.no_extractor", &SimConfig::icp_no_extractor},
    {"icp.no_srcpred", &SimConfig::icp_no_srcpred},
    {"icp.no_demand_trigger", &SimConfig::icp_no_demand_trigger},
    {"icp.no_prefetch_trigger", &SimConfig::icp_no_prefetch_trigger},
    {"stride.enabled", &SimConfig::stride_enabled},
    {"icp.enabled", &SimConfig::icp_enabled},
};

}  // namespace detail

inline void SimConfig::set(const std::string& key, const std::string& value) {
  for (const auto& b : detail::kUintKeys) {
    if (key == b.name) {
      size_t pos = 0;
      uint64_t v = 0;
      try {
        v = std::stoull(value, &pos, 0);
      } catch (...) {
        throw ConfigParseError("key '" + key + "': bad numeric value '" + value + "'");
      }
      if (pos != value.size())
        throw ConfigParseError("key '" + key + "': bad numeric value '" + value + "'");
      this->*b.field = v;
      return;
    }
  }
  for (const auto& b : detail::kDoubleKeys) {
    if (key == b.name) {
      size_t pos = 0;
      double v = 0;
      try {
        v = std::stod(value, &pos);
      } catch (...) {
        throw ConfigParseError("key '" + key + "': bad numeric value '" + value + "'");
      }
      if (pos != value.size())
        throw ConfigParseError("key '" + key + "': bad numeric value '" + value + "'");
      this->*b.field = v;
      return;
    }
  }
  for (const auto& b : detail::kBoolKeys) {
    if (key == b.name) {
      if (value == "1" || value == "true")
        this->*b.field = true;
      else if (value == "0" || value == "false")
        this->*b.field = false;
      else
        throw ConfigParseError("key '" + key + "': bad boolean value '" + value + "'");
      return;
    }
  }
  throw ConfigParseError("unknown config key '" + key + "'");
}

inline bool is_known_config_key(const std::string& key) {
  for (const auto& b : detail::kUintKeys)
    if (key == b.name) return true;
  for (const auto& b : detail::kDoubleKeys)
    if (key == b.name) return true;
  for (const auto& b : detail::kBoolKeys)
    if (key == b.name) return true;
  return false;
}

// key=value lines, '#' comments, blank lines ignored.
inline void parse_config_file(SimConfig& cfg, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigParseError("cannot open config file: " + path);
  std::string line;
  size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigParseError(path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    try {
      cfg.set(key, value);
    } catch (const ConfigParseError& err) {
      throw ConfigParseError(path + ":" + std::to_string(lineno) + ": " + err.what());
    }
  }
}

inline std::string SimConfig::canonical() const {
  std::ostringstream os;
  for (const auto& b : detail::kUintKeys) os << b.name << '=' << this->*b.field << '\n';
  for (const auto& b : detail::kDoubleKeys) os << b.name << '=' << this->*b.field << '\n';
  for (const auto& b : detail::kBoolKeys) os << b.name << '=' << (this->*b.field ? 1 : 0) << '\n';
  return os.str();
}

inline uint64_t SimConfig::hash() const {
  // FNV-1a over the canonical key=value rendering
  uint64_t h = 0xcbf29ce484222325ull;
  for (char c : canonical()) {
    h ^= uint8_t(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace icp
