#include "doctest.h"
#include "icp/prefetcher.hpp"
#include "support.hpp"

using namespace icp;

TEST_CASE("extractor threshold boundary") {
  SimConfig cfg;
  Extractor ex(cfg);
  ex.allocate(7);
  for (int i = 0; i < 9; ++i) ex.train(7, 0);
  ex.train(7, 8);  // word 1, 1/10 sits exactly on the 0.1 threshold
  CHECK(ex.query(7) == std::vector<unsigned>{0, 1});
}

TEST_CASE("untracked or untrained extractor yields nothing") {
  SimConfig cfg;
  Extractor ex(cfg);
  CHECK(ex.query(7).empty());
  ex.allocate(7);
  CHECK(ex.query(7).empty());
  ex.train(9, 0);  // unallocated pc: ignored
  CHECK(!ex.tracked(9));
}

TEST_CASE("extractor counters halve at saturation") {
  SimConfig cfg;
  Extractor ex(cfg);
  ex.allocate(7);
  for (int i = 0; i < 254; ++i) ex.train(7, 0);
  ex.train(7, 8);
  ex.train(7, 0);  // word 0 saturates at 255: all counters halve
  // counts are now [127, 0]: word 1's single observation was halved away
  CHECK(ex.query(7) == std::vector<unsigned>{0});
}

TEST_CASE("extractor capacity is LRU bounded") {
  SimConfig cfg;
  cfg.icp_extractor = 2;
  Extractor ex(cfg);
  ex.allocate(1);
  ex.train(1, 0);
  ex.allocate(2);
  ex.train(2, 0);
  ex.allocate(3);  // evicts pc 1 (least recently used)
  CHECK(!ex.tracked(1));
  CHECK(ex.tracked(2));
  CHECK(ex.tracked(3));
}

TEST_CASE("calculator semantics") {
  CHECK(calc_step(CInstKind::Add, 3, 5) == 8);
  CHECK(calc_step(CInstKind::Shl, 1, 3) == 8);
  CHECK(calc_step(CInstKind::Xor, 0x1234, 0x1234) == 0);
  CHECK(calc_step(CInstKind::Sub, 0, 1) == ~uint64_t(0));
  CHECK(calc_step(CInstKind::Shl, 1, 64 + 3) == 8);  // shift mod 64
  CHECK(calc_step(CInstKind::Shr, 0x80, 4) == 8);
  CHECK(calc_step(CInstKind::And, 0xff, 0x0f) == 0x0f);
  CHECK(calc_step(CInstKind::Or, 0xf0, 0x0f) == 0xff);
}

TEST_CASE("source predictor confidence protocol") {
  SimConfig cfg;
  SourcePredictor sp(cfg);
  sp.allocate(0x1008, 3);
  auto regval = [](uint64_t v) {
    return [v](RegisterId) { return std::optional<uint64_t>(v); };
  };
  CHECK(!sp.predict(compress_pc(0x1008)));
  sp.observe(0x1008, regval(0x1000));
  CHECK(!sp.predict(compress_pc(0x1008)));  // single observation
  sp.observe(0x1008, regval(0x1000));
  CHECK(sp.predict(compress_pc(0x1008)) == 0x1000);
  sp.observe(0x1008, regval(0x2000));  // mismatch resets
  CHECK(!sp.predict(compress_pc(0x1008)));
  sp.observe(0x1008, regval(0x2000));
  CHECK(sp.predict(compress_pc(0x1008)) == 0x2000);
}

TEST_CASE("alternating values never become confident") {
  SimConfig cfg;
  SourcePredictor sp(cfg);
  sp.allocate(0x1008, 3);
  for (int i = 0; i < 10; ++i) {
    uint64_t v = (i % 2) ? 0xAAAA : 0xBBBB;
    sp.observe(0x1008, [v](RegisterId) { return std::optional<uint64_t>(v); });
    CHECK(!sp.predict(compress_pc(0x1008)));
  }
}

namespace {

struct SpecRig {
  SimConfig cfg;
  MemoryImage image;
  PrefetchAccounting acct;
  Hierarchy hier;
  CorrelationTable corr;
  IcpPrefetcher icp;
  explicit SpecRig(SimConfig c = {})
      : cfg(c),
        hier(cfg, &image, &acct),
        corr(cfg.icp_corr_entries, cfg.icp_corr_ways),
        icp(cfg, &corr, &hier, &image) {
    icp.keep_issued_log = true;
  }

  CacheLineFill demand_fill(uint64_t line, uint16_t cpc, uint8_t offset,
                            CacheLevel level = CacheLevel::L1) {
    CacheLineFill f;
    f.line_addr = line;
    f.data = image.read_line(line);
    f.compressed_pc = cpc;
    f.source = FillSource::Demand;
    f.level = level;
    f.demand_offset = offset;
    return f;
  }
};

}  // namespace

TEST_CASE("demand-triggered chain: shift, predicted base, load") {
  SpecRig r;
  // chain: ld idx -> SHL 3 -> ADD base (off-tree) -> ld target
  const uint16_t pIdx = 1, pShl = 2, pAdd = 3, pLd = 4;
  r.corr.record_edge(pIdx, false, CacheLevel::L1, pShl,
                     {CInstKind::Shl, 3}, false);
  r.corr.record_edge(pShl, false, CacheLevel::L1, pAdd,
                     {CInstKind::Add, 0}, true);
  r.corr.record_edge(pAdd, false, CacheLevel::L1, pLd,
                     {CInstKind::Load, 0}, false);
  // predictor: pc whose compressed form is pAdd, confident base 0x10000
  r.icp.srcpred.allocate(uint64_t(pAdd) << 2, 9);
  REQUIRE(compress_pc(uint64_t(pAdd) << 2) == pAdd);
  for (int i = 0; i < 2; ++i)
    r.icp.srcpred.observe(uint64_t(pAdd) << 2,
                          [](RegisterId) { return std::optional<uint64_t>(0x10000); });

  r.image.write_word(0x2000, 5);  // extracted index value
  r.icp.on_fill(r.demand_fill(0x2000, pIdx, 0));
  CHECK(r.acct.icp.issued == 1);
  REQUIRE(r.icp.issued_log.size() == 1);
  CHECK(r.icp.issued_log[0].first == pLd);
  CHECK(r.icp.issued_log[0].second == 0x10000 + 40);
  // demand-sourced speculation routes to the LLC
  CHECK(r.hier.resident(CacheLevel::L3, line_of(0x10000 + 40)));
  CHECK(!r.hier.resident(CacheLevel::L1, line_of(0x10000 + 40)));
}

TEST_CASE("unconfident predictor aborts the task") {
  SpecRig r;
  const uint16_t pIdx = 1, pAdd = 3, pLd = 4;
  r.corr.record_edge(pIdx, false, CacheLevel::L1, pAdd,
                     {CInstKind::Add, 0}, true);
  r.corr.record_edge(pAdd, false, CacheLevel::L1, pLd,
                     {CInstKind::Load, 0}, false);
  r.icp.on_fill(r.demand_fill(0x2000, pIdx, 0));
  CHECK(r.acct.icp.issued == 0);
  CHECK(r.icp.aborted == 1);
}

TEST_CASE("pointer-chase chain continues on prefetched data, capped at 13") {
  SimConfig cfg;
  cfg.icp_fanout_cap = 64;  // expose the depth cap, not the budget
  SpecRig r(cfg);
  const uint16_t P = 5;
  r.corr.record_edge(P, false, CacheLevel::L1, P, {CInstKind::Load, 0}, false);
  // long singly-linked list, one node per line
  uint64_t base = 0x100000;
  for (uint64_t i = 0; i < 40; ++i)
    r.image.write_word(base + 64 * i, base + 64 * (i + 1));
  r.icp.on_fill(r.demand_fill(base, P, 0));
  CHECK(r.acct.icp.issued == 13);
  for (uint64_t d = 1; d <= 13; ++d)
    CHECK(r.icp.issued_log[d - 1].second == base + 64 * d);
}

TEST_CASE("prefetch-sourced trigger needs a friendly entry and extraction") {
  SpecRig r;
  const uint16_t pIdx = 1, pLd = 4;
  r.corr.record_edge(pIdx, false, CacheLevel::L1, pLd, {CInstKind::Load, 0},
                     false);
  CacheLineFill f = r.demand_fill(0x2000, pIdx, 0);
  f.source = FillSource::Prefetch;
  f.origin = PrefetchOrigin::Stride;
  f.demand_offset.reset();
  r.icp.on_fill(f);
  CHECK(r.acct.icp.issued == 0);  // not friendly

  r.corr.record_edge(pIdx, true, CacheLevel::L1, pLd, {CInstKind::Load, 0},
                     false);
  r.icp.on_fill(f);
  CHECK(r.acct.icp.issued == 0);  // friendly but extractor has no history

  r.icp.extractor.allocate(pIdx);
  for (int i = 0; i < 5; ++i) r.icp.extractor.train(pIdx, 0);
  r.image.write_word(0x2000, 0x30000);
  f.data = r.image.read_line(0x2000);
  r.icp.on_fill(f);
  CHECK(r.acct.icp.issued == 1);
  // prefetch-sourced speculation fills at the entry's level
  CHECK(r.hier.resident(CacheLevel::L1, 0x30000));
}

TEST_CASE("disabled extractor fans out to all eight words") {
  SimConfig cfg;
  cfg.icp_no_extractor = true;
  SpecRig r(cfg);
  const uint16_t pIdx = 1, pLd = 4;
  r.corr.record_edge(pIdx, true, CacheLevel::L1, pLd, {CInstKind::Load, 0},
                     false);
  for (unsigned w = 0; w < 8; ++w)
    r.image.write_word(0x2000 + 8 * w, 0x40000 + 0x1000 * w);
  CacheLineFill f = r.demand_fill(0x2000, pIdx, 0);
  f.source = FillSource::Prefetch;
  f.origin = PrefetchOrigin::Stride;
  f.demand_offset.reset();
  f.data = r.image.read_line(0x2000);
  r.icp.on_fill(f);
  CHECK(r.acct.icp.issued == 8);
}

TEST_CASE("icp-origin fills do not re-trigger speculation") {
  SpecRig r;
  const uint16_t P = 5;
  r.corr.record_edge(P, false, CacheLevel::L1, P, {CInstKind::Load, 0}, false);
  CacheLineFill f = r.demand_fill(0x2000, P, 0);
  f.source = FillSource::Prefetch;
  f.origin = PrefetchOrigin::Icp;
  r.icp.on_fill(f);
  CHECK(r.icp.speculation_tasks == 0);
}
