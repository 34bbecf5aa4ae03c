#pragma once

#include <random>
#include <stdexcept>
#include <string>

#include "icp/memory_image.hpp"
#include "icp/trace_io.hpp"
#include "icp/types.hpp"

namespace icp {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class KernelKind {
  NestedArray,       // x = a[b[i]]
  PointerChase,      // p = p->next
  ArrayOfPointers,   // x = *p[i]
  NestedPointer3,    // x = *(*(*p))
  ConditionalIndirect  // if (cond) x = a[b[i]]
};

inline const char* kernel_name(KernelKind k) {
  switch (k) {
    case KernelKind::NestedArray: return "nested-array";
    case KernelKind::PointerChase: return "pointer-chase";
    case KernelKind::ArrayOfPointers: return "array-of-pointers";
    case KernelKind::NestedPointer3: return "nested-pointer3";
    case KernelKind::ConditionalIndirect: return "conditional-indirect";
  }
  return "?";
}

inline std::optional<KernelKind> kernel_from_name(const std::string& s) {
  if (s == "nested-array") return KernelKind::NestedArray;
  if (s == "pointer-chase") return KernelKind::PointerChase;
  if (s == "array-of-pointers") return KernelKind::ArrayOfPointers;
  if (s == "nested-pointer3") return KernelKind::NestedPointer3;
  if (s == "conditional-indirect") return KernelKind::ConditionalIndirect;
  return std::nullopt;
}

struct WorkloadSpec {
  KernelKind kernel = KernelKind::NestedArray;
  uint64_t element_count = 4096;
  uint64_t iteration_count = 8192;
  uint64_t rng_seed = 1;
  uint64_t value_range = uint64_t(1) << 20;
  double other_density = 0.1;  // OTHER instructions per iteration
  uint64_t pc_base = 0x400000;
  uint64_t mem_base = 0x10000000;
};

// Static-PC annotation for the generated loop, used by tests and the ideal
// oracle to find the striding and irregular loads without re-deriving them.
struct WorkloadPcs {
  uint64_t inner_load = 0;   // striding load (b[i], p[i]); 0 for PointerChase
  uint64_t mid_load = 0;     // NestedPointer3 second-level load
  uint64_t outer_load = 0;   // the irregular target load
};

struct Workload {
  Trace trace;
  MemoryImage image;
  WorkloadPcs pcs;
};

namespace detail {

// Index arrays carry a circular guard: line-granular prefetchers run a few
// lines past the last element, and the guard repeats the first elements so
// every word a prefetch can expose is one the loop actually consumes.
inline constexpr uint64_t kGuardElems = 32;

class TraceBuilder {
 public:
  explicit TraceBuilder(uint64_t pc_base) : pc_base_(pc_base) {}

  // Static slot -> pc. Each distinct slot is one static instruction.
  uint64_t pc(unsigned slot) const { return pc_base_ + 4 * slot; }

  void alu(unsigned slot, AluKind kind, RegisterId dst,
           std::vector<RegisterId> srcs, int64_t imm) {
    CommittedInstruction in;
    in.seq = trace.size();
    in.pc = pc(slot);
    in.op = OpClass::Alu;
    in.alu = kind;
    in.dst = dst;
    in.srcs = std::move(srcs);
    in.imm = imm;
    trace.push_back(std::move(in));
  }

  void li(unsigned slot, RegisterId dst, uint64_t value) {
    CommittedInstruction in;
    in.seq = trace.size();
    in.pc = pc(slot);
    in.op = OpClass::Alu;
    in.alu = AluKind::Add;
    in.dst = dst;
    in.imm = int64_t(value);
    trace.push_back(std::move(in));
  }

  void load(unsigned slot, RegisterId dst, RegisterId addr_reg, int64_t imm,
            uint64_t addr, uint64_t value) {
    CommittedInstruction in;
    in.seq = trace.size();
    in.pc = pc(slot);
    in.op = OpClass::Load;
    in.dst = dst;
    in.srcs = {addr_reg};
    in.imm = imm;
    in.mem_addr = addr;
    in.mem_size = 8;
    in.mem_value = value;
    trace.push_back(std::move(in));
  }

  void other(unsigned slot, RegisterId dst, uint64_t value) {
    CommittedInstruction in;
    in.seq = trace.size();
    in.pc = pc(slot);
    in.op = OpClass::Other;
    in.dst = dst;
    in.imm = int64_t(value);
    trace.push_back(std::move(in));
  }

  Trace trace;

 private:
  uint64_t pc_base_;
};

}  // namespace detail

inline Workload generate_workload(const WorkloadSpec& spec) {
  if (spec.element_count < 2)
    throw ConfigError("element_count must be >= 2");
  if (spec.iteration_count < 1)
    throw ConfigError("iteration_count must be >= 1");
  if (spec.value_range < 1) throw ConfigError("value_range must be >= 1");

  std::mt19937_64 rng(spec.rng_seed);
  auto uniform = [&rng](uint64_t n) { return rng() % n; };
  auto chance = [&rng, &spec]() {
    return double(rng() % 10000) / 10000.0 < spec.other_density;
  };

  const uint64_t n = spec.element_count;
  const uint64_t iters = spec.iteration_count;
  detail::TraceBuilder b(spec.pc_base);
  Workload w;
  WorkloadPcs& pcs = w.pcs;

  // Register plan: r1 loop index, r2/r3 base pointers, r10+ scratch,
  // r20 chase pointer, r100 OTHER scratch.
  const RegisterId rIdx = 1, rB = 2, rA = 3;
  const RegisterId rT0 = 10, rT1 = 11, rV = 12, rT2 = 13, rT3 = 14, rX = 15;
  const RegisterId rP = 20;

  switch (spec.kernel) {
    case KernelKind::NestedArray:
    case KernelKind::ConditionalIndirect: {
      const bool cond = spec.kernel == KernelKind::ConditionalIndirect;
      const uint64_t b_base = spec.mem_base;
      const uint64_t a_base = spec.mem_base + 0x10000000;
      std::vector<uint64_t> idx(n + detail::kGuardElems);
      for (uint64_t i = 0; i < n; ++i) idx[i] = uniform(n);
      for (uint64_t g = 0; g < detail::kGuardElems; ++g)
        idx[n + g] = idx[g % n];
      for (uint64_t i = 0; i < idx.size(); ++i)
        w.image.write_word(b_base + 8 * i, idx[i]);
      std::vector<uint64_t> a_vals(n);
      for (uint64_t i = 0; i < n; ++i) {
        a_vals[i] = uniform(spec.value_range);
        w.image.write_word(a_base + 8 * i, a_vals[i]);
      }
      b.li(0, rB, b_base);
      b.li(1, rA, a_base);
      b.li(2, rIdx, 0);
      pcs.inner_load = b.pc(6);
      pcs.outer_load = b.pc(9);
      uint64_t cur = 0;
      for (uint64_t it = 0; it < iters; ++it) {
        if (chance()) b.other(3, rX, it);
        b.alu(4, AluKind::Shl, rT0, {rIdx}, 3);
        b.alu(5, AluKind::Add, rT1, {rT0, rB}, 0);
        b.load(6, rV, rT1, 0, b_base + 8 * cur, idx[cur]);
        if (!cond || uniform(2) == 0) {
          b.alu(7, AluKind::Shl, rT2, {rV}, 3);
          b.alu(8, AluKind::Add, rT3, {rT2, rA}, 0);
          b.load(9, rX, rT3, 0, a_base + 8 * idx[cur], a_vals[idx[cur]]);
        }
        b.alu(10, AluKind::Add, rIdx, {rIdx}, 1);
        if (++cur == n) {
          b.li(11, rIdx, 0);
          cur = 0;
        }
      }
      break;
    }

    case KernelKind::PointerChase: {
      const uint64_t node_base = spec.mem_base;
      // Random cycle over all nodes, one node per cache line.
      std::vector<uint64_t> order(n);
      for (uint64_t i = 0; i < n; ++i) order[i] = i;
      for (uint64_t i = n - 1; i > 0; --i)
        std::swap(order[i], order[uniform(i + 1)]);
      auto node_addr = [&](uint64_t k) { return node_base + 64 * k; };
      for (uint64_t i = 0; i < n; ++i)
        w.image.write_word(node_addr(order[i]), node_addr(order[(i + 1) % n]));
      b.li(0, rP, node_addr(order[0]));
      pcs.outer_load = b.pc(2);
      uint64_t pos = 0;
      for (uint64_t it = 0; it < iters; ++it) {
        if (chance()) b.other(1, 100, it);
        uint64_t cur_addr = node_addr(order[pos % n]);
        uint64_t next_addr = node_addr(order[(pos + 1) % n]);
        b.load(2, rP, rP, 0, cur_addr, next_addr);
        ++pos;
      }
      break;
    }

    case KernelKind::ArrayOfPointers: {
      const uint64_t p_base = spec.mem_base;
      const uint64_t tgt_base = spec.mem_base + 0x10000000;
      std::vector<uint64_t> tgt(n);
      for (uint64_t i = 0; i < n; ++i) tgt[i] = uniform(n);
      std::vector<uint64_t> payload(n);
      for (uint64_t i = 0; i < n; ++i) {
        payload[i] = uniform(spec.value_range);
        w.image.write_word(tgt_base + 64 * i, payload[i]);
      }
      auto ptr_of = [&](uint64_t i) { return tgt_base + 64 * tgt[i % n]; };
      for (uint64_t i = 0; i < n + detail::kGuardElems; ++i)
        w.image.write_word(p_base + 8 * i, ptr_of(i % n));
      b.li(0, rB, p_base);
      b.li(1, rIdx, 0);
      pcs.inner_load = b.pc(5);
      pcs.outer_load = b.pc(6);
      uint64_t cur = 0;
      for (uint64_t it = 0; it < iters; ++it) {
        if (chance()) b.other(2, rT2, it);
        b.alu(3, AluKind::Shl, rT0, {rIdx}, 3);
        b.alu(4, AluKind::Add, rT1, {rT0, rB}, 0);
        b.load(5, rV, rT1, 0, p_base + 8 * cur, ptr_of(cur));
        b.load(6, rT2, rV, 0, ptr_of(cur), payload[tgt[cur % n]]);
        b.alu(7, AluKind::Add, rIdx, {rIdx}, 1);
        if (++cur == n) {
          b.li(8, rIdx, 0);
          cur = 0;
        }
      }
      break;
    }

    case KernelKind::NestedPointer3: {
      const uint64_t p_base = spec.mem_base;
      const uint64_t l2_base = spec.mem_base + 0x10000000;
      const uint64_t l3_base = spec.mem_base + 0x20000000;
      std::vector<uint64_t> l2_of(n), l3_of(n), payload(n);
      for (uint64_t i = 0; i < n; ++i) l3_of[i] = uniform(n);
      for (uint64_t i = 0; i < n; ++i) l2_of[i] = uniform(n);
      for (uint64_t i = 0; i < n; ++i) {
        payload[i] = uniform(spec.value_range);
        w.image.write_word(l3_base + 64 * i, payload[i]);
      }
      for (uint64_t i = 0; i < n; ++i)
        w.image.write_word(l2_base + 64 * i, l3_base + 64 * l3_of[i]);
      auto p_of = [&](uint64_t i) { return l2_base + 64 * l2_of[i % n]; };
      for (uint64_t i = 0; i < n + detail::kGuardElems; ++i)
        w.image.write_word(p_base + 8 * i, p_of(i % n));
      b.li(0, rB, p_base);
      b.li(1, rIdx, 0);
      pcs.inner_load = b.pc(5);
      pcs.mid_load = b.pc(6);
      pcs.outer_load = b.pc(7);
      uint64_t cur = 0;
      for (uint64_t it = 0; it < iters; ++it) {
        if (chance()) b.other(2, rT3, it);
        b.alu(3, AluKind::Shl, rT0, {rIdx}, 3);
        b.alu(4, AluKind::Add, rT1, {rT0, rB}, 0);
        uint64_t q1 = p_of(cur);
        uint64_t q2 = l3_base + 64 * l3_of[l2_of[cur % n]];
        b.load(5, rV, rT1, 0, p_base + 8 * cur, q1);
        b.load(6, rT2, rV, 0, q1, q2);
        b.load(7, rT3, rT2, 0, q2, payload[l3_of[l2_of[cur % n]]]);
        b.alu(8, AluKind::Add, rIdx, {rIdx}, 1);
        if (++cur == n) {
          b.li(9, rIdx, 0);
          cur = 0;
        }
      }
      break;
    }
  }

  w.trace = std::move(b.trace);
  return w;
}

}  // namespace icp
