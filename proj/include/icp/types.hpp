#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace icp {

inline constexpr unsigned kLineSize = 64;
inline constexpr unsigned kWordSize = 8;
inline constexpr unsigned kWordsPerLine = kLineSize / kWordSize;

// 8-bit architectural register tag.
using RegisterId = uint8_t;
inline constexpr unsigned kNumRegisters = 256;

enum class OpClass : uint8_t { Load, Store, Alu, Other };

enum class AluKind : uint8_t { Add, Sub, Shl, Shr, And, Or, Xor };

enum class CacheLevel : uint8_t { L1 = 0, L2 = 1, L3 = 2 };

enum class FillSource : uint8_t { Demand, Prefetch };

enum class PrefetchOrigin : uint8_t { Stride, Icp, Ideal };

// One retired instruction as seen by the commit stream.
struct CommittedInstruction {
  uint64_t seq = 0;
  uint64_t pc = 0;
  OpClass op = OpClass::Other;
  AluKind alu = AluKind::Add;  // valid iff op == Alu
  std::optional<RegisterId> dst;
  std::vector<RegisterId> srcs;  // 0..2 entries
  int64_t imm = 0;
  std::optional<uint64_t> mem_addr;
  uint8_t mem_size = 8;  // 1, 2, 4 or 8
  std::optional<uint64_t> mem_value;

  bool is_mem() const { return op == OpClass::Load || op == OpClass::Store; }

  bool operator==(const CommittedInstruction&) const = default;
};

// Op kinds representable in the Correlation Table's CInst field.
enum class CInstKind : uint8_t {
  Add = 0,
  Sub,
  Shl,
  Shr,
  And,
  Or,
  Xor,
  Load
};

// 3-bit op code plus 8-bit immediate.
struct CompressedInst {
  CInstKind kind = CInstKind::Add;
  int8_t imm8 = 0;

  bool operator==(const CompressedInst&) const = default;
};

inline std::optional<CInstKind> cinst_kind_of(const CommittedInstruction& in) {
  if (in.op == OpClass::Load) return CInstKind::Load;
  if (in.op != OpClass::Alu) return std::nullopt;
  switch (in.alu) {
    case AluKind::Add: return CInstKind::Add;
    case AluKind::Sub: return CInstKind::Sub;
    case AluKind::Shl: return CInstKind::Shl;
    case AluKind::Shr: return CInstKind::Shr;
    case AluKind::And: return CInstKind::And;
    case AluKind::Or: return CInstKind::Or;
    case AluKind::Xor: return CInstKind::Xor;
  }
  return std::nullopt;
}

// Encode an instruction for the Correlation Table; fails for unsupported ops
// or immediates that do not fit in 8 bits.
inline std::optional<CompressedInst> compress_inst(
    const CommittedInstruction& in) {
  auto kind = cinst_kind_of(in);
  if (!kind) return std::nullopt;
  if (in.imm < -128 || in.imm > 127) return std::nullopt;
  return CompressedInst{*kind, static_cast<int8_t>(in.imm)};
}

// A 64-byte line response delivered to fill observers.
struct CacheLineFill {
  uint64_t line_addr = 0;  // 64-byte aligned
  std::array<uint8_t, kLineSize> data{};
  uint16_t compressed_pc = 0;
  FillSource source = FillSource::Demand;
  PrefetchOrigin origin = PrefetchOrigin::Stride;  // valid iff Prefetch
  CacheLevel level = CacheLevel::L1;
  std::optional<uint8_t> demand_offset;  // byte offset in line, demand only
};

inline uint64_t line_of(uint64_t addr) { return addr & ~uint64_t(kLineSize - 1); }

}  // namespace icp
