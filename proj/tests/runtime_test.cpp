#include <gtest/gtest.h>

#include "gfam/error.hpp"
#include "gfam/runtime.hpp"

using namespace gfam;

namespace {

void expect_disjoint(const SegmentMap& m) {
  auto all = m.allocations();
  for (std::size_t i = 1; i < all.size(); ++i) {
    // Different segments alias the same DRAM, so compare offsets across all of them.
    for (std::size_t j = 0; j < i; ++j) {
      std::uint64_t a0 = m.dram_offset(all[j].addr), a1 = a0 + all[j].bytes;
      std::uint64_t b0 = m.dram_offset(all[i].addr), b1 = b0 + all[i].bytes;
      ASSERT_TRUE(a1 <= b0 || b1 <= a0) << "allocations " << j << " and " << i << " overlap";
    }
  }
}

}  // namespace

TEST(SegmentMap, SegmentsAliasOneDram) {
  SegmentMap m(1 << 20, 2, 4096);
  Addr v = m.cxl_alloc(0, 100, Primitive::Vanilla);
  Addr c = m.cxl_alloc(1, 64, Primitive::Ctxnl);
  EXPECT_EQ(m.segment_of(v), Segment::Vanilla);
  EXPECT_EQ(m.segment_of(c), Segment::Ctxnl);
  EXPECT_EQ(m.dram_offset(c), 512u * 1024);
  EXPECT_EQ(m.app_cursor(0), 128u);  // rounded to lines
  Addr h = m.hw_alloc(1);
  EXPECT_EQ(m.segment_of(h), Segment::HwConfig);
  EXPECT_THROW(m.segment_of(3 * (1 << 20)), ConfigError);
}

TEST(SegmentMap, HwAllocFirstFitReusesAndCoalescesFreedChunks) {
  SegmentMap m(1 << 20, 1, 4096);
  Addr a = m.hw_alloc(4096);
  Addr b = m.hw_alloc(8192);
  Addr c = m.hw_alloc(4096);
  EXPECT_LT(b, a);
  m.hw_free(a);
  m.hw_free(b);
  EXPECT_EQ(m.free_blocks(), 1u);  // coalesced into one 3-chunk block
  Addr d = m.hw_alloc(12288);
  EXPECT_EQ(d, b);
  EXPECT_EQ(m.free_blocks(), 0u);
  EXPECT_THROW(m.hw_free(a + 64), ConfigError);
  (void)c;
  expect_disjoint(m);
}

TEST(SegmentMap, ExhaustionRaisesOutOfMemory) {
  SegmentMap m(64 * 1024, 2, 4096);
  EXPECT_NO_THROW(m.cxl_alloc(0, 32 * 1024, Primitive::Vanilla));
  EXPECT_THROW(m.cxl_alloc(0, 64, Primitive::Ctxnl), OutOfMemoryError);
  m.cxl_alloc(1, 16 * 1024, Primitive::Ctxnl);
  EXPECT_NO_THROW(m.hw_alloc(8192));
  EXPECT_THROW(m.hw_alloc(16384), OutOfMemoryError);
  expect_disjoint(m);
}

TEST(SegmentMap, BadGeometryRejected) {
  EXPECT_THROW(SegmentMap(1 << 20, 0, 4096), ConfigError);
  EXPECT_THROW(SegmentMap(1 << 20, 2, 100), ConfigError);
  EXPECT_THROW(SegmentMap(1000, 2, 64), ConfigError);
}

// Property: random interleaved allocations never overlap.
TEST(SegmentMap, RandomAllocationsStayDisjoint) {
  SegmentMap m(8 << 20, 4, 4096);
  Rng rng(3, 3);
  std::vector<Addr> hw;
  for (int i = 0; i < 400; ++i) {
    try {
      switch (rng.below(3)) {
        case 0:
          m.cxl_alloc(static_cast<NodeId>(rng.below(4)), 1 + rng.below(20000),
                      rng.bernoulli(0.5) ? Primitive::Vanilla : Primitive::Ctxnl);
          break;
        case 1: hw.push_back(m.hw_alloc(1 + rng.below(30000))); break;
        default:
          if (!hw.empty()) {
            std::size_t k = rng.below(hw.size());
            m.hw_free(hw[k]);
            hw.erase(hw.begin() + static_cast<std::ptrdiff_t>(k));
          }
      }
    } catch (const OutOfMemoryError&) {
    }
  }
  expect_disjoint(m);
}

TEST(ResizeMonitor, SplitsHotTableAtIntervalBoundary) {
  ViewShimConfig c;
  c.vat.entries_per_table = 1024;
  c.vat.lut_bits = 4;
  ViewShim shim(c, 1, 1);
  SegmentMap seg(64 << 20, 1, 4096);
  ResizeMonitor mon(ResizePolicy{}, make_profile(ProfileKind::CxlProto), shim, &seg);
  Rng rng(1, 1);
  std::vector<std::uint64_t> idx;
  while (shim.vat().total_entries() < 700) {
    std::uint64_t i = rng.next() >> 12;
    LineData d{};
    store_u64(d.data(), i);
    if (shim.vat_insert(0, i, d).status == InsertStatus::Ok) idx.push_back(i);
  }
  EXPECT_TRUE(mon.tick(5'000'000).empty());
  auto acts = mon.tick(10'000'000);
  ASSERT_EQ(acts.size(), 1u);
  EXPECT_EQ(acts[0].kind, ResizeAction::Kind::Split);
  EXPECT_GT(acts[0].blocked_ns, 0u);
  EXPECT_EQ(mon.stats().splits, 1u);
  EXPECT_EQ(shim.vat().live_tables().size(), 2u);
  EXPECT_GE(shim.vat().info(0).blocked_until, 10'000'000u);
  for (std::uint64_t i : idx) ASSERT_TRUE(shim.peek_view(0, i));
  EXPECT_EQ(shim.check_invariants(), "");
}

TEST(ResizeMonitor, EmptyLeafMergesBack) {
  ViewShimConfig c;
  c.vat.entries_per_table = 1024;
  c.vat.lut_bits = 4;
  ViewShim shim(c, 1, 1);
  ResizeMonitor mon(ResizePolicy{}, make_profile(ProfileKind::CxlProto), shim);
  ASSERT_TRUE(shim.vat().split(0, 2).done);
  auto acts = mon.monitor_and_resize(0);
  bool merged = false;
  for (const auto& a : acts) merged |= a.kind == ResizeAction::Kind::Merge;
  EXPECT_TRUE(merged);
  EXPECT_EQ(shim.vat().live_tables().size(), 1u);
  EXPECT_EQ(shim.vat().check_invariants(), "");
}

TEST(ResizePolicy, Validation) {
  ResizePolicy p;
  p.k = 3;
  EXPECT_THROW(p.validate(), ConfigError);
  p = ResizePolicy{};
  p.shrink = 0.7;
  EXPECT_THROW(p.validate(), ConfigError);
}
