#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "icp/memory_image.hpp"
#include "icp/trace_io.hpp"
#include "icp/types.hpp"

namespace icp {

struct ReplayError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Architectural register file used by the replay oracle and by the
// in-simulator commit stream.
class RegisterFile {
 public:
  uint64_t read(RegisterId r) const {
    if (!written_[r])
      throw ReplayError("source register r" + std::to_string(r) +
                        " read before any write");
    return regs_[r];
  }

  bool has(RegisterId r) const { return written_[r]; }

  void write(RegisterId r, uint64_t v) {
    regs_[r] = v;
    written_[r] = true;
  }

 private:
  std::array<uint64_t, kNumRegisters> regs_{};
  std::array<bool, kNumRegisters> written_{};
};

inline uint64_t alu_eval(AluKind kind, uint64_t a, uint64_t b) {
  switch (kind) {
    case AluKind::Add: return a + b;
    case AluKind::Sub: return a - b;
    case AluKind::Shl: return a << (b & 63);
    case AluKind::Shr: return a >> (b & 63);
    case AluKind::And: return a & b;
    case AluKind::Or: return a | b;
    case AluKind::Xor: return a ^ b;
  }
  return 0;
}

// Executes one instruction architecturally. Operand convention: sources are
// taken from the register list, padded with the immediate (a 0-source ALU op
// materializes the immediate; a 1-source op combines register and immediate).
// Loads read the image at src0 + imm; stores write src1's value to src0 + imm.
// OTHER writes its immediate to dst when one is present.
inline void replay_step(const CommittedInstruction& in, RegisterFile& rf,
                        MemoryImage& image) {
  switch (in.op) {
    case OpClass::Alu: {
      uint64_t a = in.srcs.size() >= 1 ? rf.read(in.srcs[0]) : uint64_t(in.imm);
      uint64_t b = in.srcs.size() >= 2 ? rf.read(in.srcs[1]) : uint64_t(in.imm);
      uint64_t v = in.srcs.empty() ? uint64_t(in.imm) : alu_eval(in.alu, a, b);
      if (!in.dst) throw ReplayError("ALU without destination at seq " + std::to_string(in.seq));
      rf.write(*in.dst, v);
      break;
    }
    case OpClass::Load: {
      if (in.srcs.empty() || !in.mem_addr || !in.dst)
        throw ReplayError("malformed LOAD at seq " + std::to_string(in.seq));
      uint64_t addr = rf.read(in.srcs[0]) + uint64_t(in.imm);
      if (addr != *in.mem_addr)
        throw ReplayError("LOAD address mismatch at seq " + std::to_string(in.seq));
      rf.write(*in.dst, image.read(addr, in.mem_size));
      break;
    }
    case OpClass::Store: {
      if (in.srcs.size() < 2 || !in.mem_addr || !in.mem_value)
        throw ReplayError("malformed STORE at seq " + std::to_string(in.seq));
      uint64_t addr = rf.read(in.srcs[0]) + uint64_t(in.imm);
      if (addr != *in.mem_addr)
        throw ReplayError("STORE address mismatch at seq " + std::to_string(in.seq));
      image.write(addr, rf.read(in.srcs[1]), in.mem_size);
      break;
    }
    case OpClass::Other:
      if (in.dst) rf.write(*in.dst, uint64_t(in.imm));
      break;
  }
}

struct ReplayResult {
  // One slot per trace index: the value the load produced, or nullopt for
  // non-load instructions.
  std::vector<std::optional<uint64_t>> load_values;
  RegisterFile final_regs;
};

// Architectural execution over a copy of the image. The per-seq load values
// are the oracle the speculative path is checked against.
inline ReplayResult functional_replay(const Trace& trace, const MemoryImage& image) {
  ReplayResult r;
  MemoryImage mem = image;
  r.load_values.reserve(trace.size());
  for (const auto& in : trace) {
    replay_step(in, r.final_regs, mem);
    if (in.op == OpClass::Load)
      r.load_values.push_back(in.dst ? std::optional(r.final_regs.read(*in.dst))
                                     : std::nullopt);
    else
      r.load_values.push_back(std::nullopt);
  }
  return r;
}

}  // namespace icp
