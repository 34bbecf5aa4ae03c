#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "icp/memory_image.hpp"
#include "icp/types.hpp"

namespace icp {

using Trace = std::vector<CommittedInstruction>;

struct TraceParseError : std::runtime_error {
  TraceParseError(const std::string& path, size_t lineno, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(lineno) + ": " + what) {}
};

namespace detail {

inline const char* op_token(const CommittedInstruction& in) {
  switch (in.op) {
    case OpClass::Load: return "LD";
    case OpClass::Store: return "ST";
    case OpClass::Other: return "OTH";
    case OpClass::Alu:
      switch (in.alu) {
        case AluKind::Add: return "ADD";
        case AluKind::Sub: return "SUB";
        case AluKind::Shl: return "SHL";
        case AluKind::Shr: return "SHR";
        case AluKind::And: return "AND";
        case AluKind::Or: return "OR";
        case AluKind::Xor: return "XOR";
      }
  }
  return "OTH";
}

inline bool parse_op(const std::string& tok, OpClass& op, AluKind& alu) {
  if (tok == "LD") { op = OpClass::Load; return true; }
  if (tok == "ST") { op = OpClass::Store; return true; }
  if (tok == "OTH") { op = OpClass::Other; return true; }
  op = OpClass::Alu;
  if (tok == "ADD") { alu = AluKind::Add; return true; }
  if (tok == "SUB") { alu = AluKind::Sub; return true; }
  if (tok == "SHL") { alu = AluKind::Shl; return true; }
  if (tok == "SHR") { alu = AluKind::Shr; return true; }
  if (tok == "AND") { alu = AluKind::And; return true; }
  if (tok == "OR") { alu = AluKind::Or; return true; }
  if (tok == "XOR") { alu = AluKind::Xor; return true; }
  return false;
}

inline uint64_t parse_hex(const std::string& path, size_t lineno,
                          const std::string& field, const std::string& tok) {
  if (tok.size() < 3 || tok[0] != '0' || (tok[1] != 'x' && tok[1] != 'X'))
    throw TraceParseError(path, lineno, "field '" + field + "': expected 0x-prefixed hex, got '" + tok + "'");
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(tok.data() + 2, tok.data() + tok.size(), v, 16);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    throw TraceParseError(path, lineno, "field '" + field + "': bad hex '" + tok + "'");
  return v;
}

inline uint64_t parse_dec(const std::string& path, size_t lineno,
                          const std::string& field, const std::string& tok) {
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v, 10);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    throw TraceParseError(path, lineno, "field '" + field + "': bad integer '" + tok + "'");
  return v;
}

}  // namespace detail

inline constexpr const char* kTraceHeader = "#icp-trace v1";
inline constexpr const char* kMemHeader = "#icp-mem v1";

inline void write_trace(const Trace& trace, std::ostream& os) {
  os << kTraceHeader << '\n';
  char buf[256];
  for (const auto& in : trace) {
    std::string dst = in.dst ? "0x" : "-";
    // seq pc op dst nsrc src0 src1 imm addr size value
    int n = std::snprintf(buf, sizeof buf, "%llu 0x%llx %s",
                          (unsigned long long)in.seq, (unsigned long long)in.pc,
                          detail::op_token(in));
    os.write(buf, n);
    if (in.dst)
      n = std::snprintf(buf, sizeof buf, " 0x%x", unsigned(*in.dst));
    else
      n = std::snprintf(buf, sizeof buf, " -");
    os.write(buf, n);
    n = std::snprintf(buf, sizeof buf, " %zu", in.srcs.size());
    os.write(buf, n);
    for (size_t i = 0; i < 2; ++i) {
      if (i < in.srcs.size())
        n = std::snprintf(buf, sizeof buf, " 0x%x", unsigned(in.srcs[i]));
      else
        n = std::snprintf(buf, sizeof buf, " -");
      os.write(buf, n);
    }
    n = std::snprintf(buf, sizeof buf, " 0x%llx", (unsigned long long)(uint64_t)in.imm);
    os.write(buf, n);
    if (in.mem_addr)
      n = std::snprintf(buf, sizeof buf, " 0x%llx %u", (unsigned long long)*in.mem_addr,
                        unsigned(in.mem_size));
    else
      n = std::snprintf(buf, sizeof buf, " - %u", unsigned(in.mem_size));
    os.write(buf, n);
    if (in.mem_value)
      n = std::snprintf(buf, sizeof buf, " 0x%llx\n", (unsigned long long)*in.mem_value);
    else
      n = std::snprintf(buf, sizeof buf, " -\n");
    os.write(buf, n);
  }
}

inline void write_trace(const Trace& trace, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  write_trace(trace, os);
}

inline Trace read_trace(std::istream& is, const std::string& path = "<stream>") {
  std::string line;
  size_t lineno = 1;
  if (!std::getline(is, line) || line != kTraceHeader)
    throw TraceParseError(path, 1, "missing '#icp-trace v1' header");
  Trace trace;
  std::vector<std::string> toks;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    toks.clear();
    std::istringstream ss(line);
    std::string t;
    while (ss >> t) toks.push_back(t);
    if (toks.size() != 11)
      throw TraceParseError(path, lineno, "expected 11 fields, got " + std::to_string(toks.size()));
    CommittedInstruction in;
    in.seq = detail::parse_dec(path, lineno, "seq", toks[0]);
    in.pc = detail::parse_hex(path, lineno, "pc", toks[1]);
    if (!detail::parse_op(toks[2], in.op, in.alu))
      throw TraceParseError(path, lineno, "field 'op': unknown op '" + toks[2] + "'");
    if (toks[3] != "-")
      in.dst = RegisterId(detail::parse_hex(path, lineno, "dst", toks[3]));
    size_t nsrc = detail::parse_dec(path, lineno, "nsrc", toks[4]);
    if (nsrc > 2)
      throw TraceParseError(path, lineno, "field 'nsrc': at most 2 sources");
    for (size_t i = 0; i < nsrc; ++i) {
      const std::string& st = toks[5 + i];
      if (st == "-")
        throw TraceParseError(path, lineno, "field 'src" + std::to_string(i) + "': missing");
      in.srcs.push_back(RegisterId(detail::parse_hex(path, lineno, "src", st)));
    }
    in.imm = int64_t(detail::parse_hex(path, lineno, "imm", toks[7]));
    if (toks[8] != "-")
      in.mem_addr = detail::parse_hex(path, lineno, "addr", toks[8]);
    in.mem_size = uint8_t(detail::parse_dec(path, lineno, "size", toks[9]));
    if (toks[10] != "-")
      in.mem_value = detail::parse_hex(path, lineno, "value", toks[10]);
    trace.push_back(std::move(in));
  }
  return trace;
}

inline Trace read_trace(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for read: " + path);
  return read_trace(is, path);
}

inline void write_image(const MemoryImage& image, std::ostream& os) {
  os << kMemHeader << '\n';
  char buf[16];
  for (const auto& [addr, data] : image.lines()) {
    os << "0x" << std::hex << addr << std::dec << ' ';
    for (uint8_t b : data) {
      std::snprintf(buf, sizeof buf, "%02x", b);
      os << buf;
    }
    os << '\n';
  }
}

inline void write_image(const MemoryImage& image, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  write_image(image, os);
}

inline MemoryImage read_image(std::istream& is, const std::string& path = "<stream>") {
  std::string line;
  size_t lineno = 1;
  if (!std::getline(is, line) || line != kMemHeader)
    throw TraceParseError(path, 1, "missing '#icp-mem v1' header");
  MemoryImage image;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string addr_tok, data_tok;
    if (!(ss >> addr_tok >> data_tok) || data_tok.size() != 2 * kLineSize)
      throw TraceParseError(path, lineno, "bad image line");
    uint64_t addr = detail::parse_hex(path, lineno, "addr", addr_tok);
    for (unsigned i = 0; i < kLineSize; ++i) {
      unsigned v = 0;
      auto [p, ec] = std::from_chars(data_tok.data() + 2 * i, data_tok.data() + 2 * i + 2, v, 16);
      if (ec != std::errc{} || p != data_tok.data() + 2 * i + 2)
        throw TraceParseError(path, lineno, "bad image byte");
      image.write_byte(addr + i, uint8_t(v));
    }
  }
  return image;
}

inline MemoryImage read_image(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for read: " + path);
  return read_image(is, path);
}

}  // namespace icp
