#include <gtest/gtest.h>

#include <array>
#include <map>

#include "gfam/error.hpp"
#include "gfam/fabric.hpp"
#include "gfam/memport.hpp"
#include "gfam/scheduler.hpp"
#include "support.hpp"

using namespace gfam;

namespace {

std::array<std::uint8_t, 8> word(std::uint64_t v) {
  std::array<std::uint8_t, 8> b{};
  store_u64(b.data(), v);
  return b;
}

}  // namespace

TEST(VanillaLatency, ColdMissRemoteModifiedAndSfEviction) {
  FabricConfig f = fixtures::small_fabric(2);
  f.sf.entries = 16;
  f.sf.ways = 16;  // one set
  Fabric fab(f);
  Addr base = fab.cxl_alloc(0, 64 * kLineSize, Primitive::Vanilla);
  std::array<std::uint8_t, 8> buf{};

  EXPECT_EQ(fab.load(0, base, buf).total(), 456u);
  EXPECT_EQ(fab.store(1, base + kLineSize, word(5)).total(), 456u);
  Breakdown remote = fab.load(0, base + kLineSize, buf);
  EXPECT_EQ(remote.total(), 847u);
  EXPECT_EQ(load_u64(buf.data()), 5u);
  EXPECT_EQ(remote.remote_signal, 847u);

  // Fill the only SF set, then one more miss must evict an entry.
  for (int i = 2; i < 16; ++i) fab.load(0, base + i * kLineSize, buf);
  EXPECT_EQ(fab.vanilla().snoop_filter().occupancy(), 16u);
  Breakdown ev = fab.load(1, base + 20 * kLineSize, buf);
  EXPECT_EQ(ev.total(), 456u + 3 * 420u);
  EXPECT_EQ(ev.sf_bi, 3 * 420u);
  EXPECT_EQ(fab.vanilla().stats().total().sf_evictions, 1u);
  EXPECT_EQ(fab.check_invariants(), "");
}

TEST(VanillaLatency, CacheHitIsFree) {
  Fabric fab(fixtures::small_fabric(2));
  Addr a = fab.cxl_alloc(0, kLineSize, Primitive::Vanilla);
  std::array<std::uint8_t, 8> buf{};
  fab.load(0, a, buf);
  EXPECT_EQ(fab.load(0, a, buf).total(), 0u);
}

TEST(VanillaCoherence, SfEvictionWritesBackDirtyVictim) {
  FabricConfig f = fixtures::small_fabric(2);
  f.sf.entries = 16;
  f.sf.ways = 16;
  Fabric fab(f);
  Addr base = fab.cxl_alloc(0, 64 * kLineSize, Primitive::Vanilla);
  fab.store(0, base, word(77));
  std::array<std::uint8_t, 8> buf{};
  for (int i = 1; i < 17; ++i) fab.load(1, base + i * kLineSize, buf);
  std::array<std::uint8_t, 8> mem{};
  fab.peek_dram(base, mem);
  EXPECT_EQ(load_u64(mem.data()), 77u);
  EXPECT_FALSE(fab.caches()[0].lookup(base));
  EXPECT_EQ(fab.check_invariants(), "");
}

// Property: under any sequence of single-issuer operations the coherent
// memory behaves like a flat array, and SWMR plus SF inclusivity hold.
TEST(VanillaCoherence, RandomOpsMatchFlatMemoryAndKeepInvariants) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    FabricConfig f = fixtures::small_fabric(4);
    f.sf.entries = 32;
    f.sf.ways = 4;
    f.seed = seed;
    Fabric fab(f);
    Addr base = fab.cxl_alloc(0, 48 * kLineSize, Primitive::Vanilla);
    std::map<Addr, std::uint64_t> flat;
    Rng rng(seed, 99);
    for (int step = 0; step < 4000; ++step) {
      NodeId n = static_cast<NodeId>(rng.below(4));
      Addr a = base + rng.below(48) * kLineSize + 8 * rng.below(8);
      switch (rng.below(4)) {
        case 0: {
          std::uint64_t v = rng.next();
          fab.store(n, a, word(v));
          flat[a] = v;
          break;
        }
        case 1: {
          RmwResult r = fab.faa(n, a, 3);
          ASSERT_EQ(r.old_value, flat[a]);
          flat[a] += 3;
          break;
        }
        case 2: {
          std::uint64_t expect = rng.bernoulli(0.5) ? flat[a] : flat[a] + 1;
          RmwResult r = fab.cas(n, a, expect, 42);
          ASSERT_EQ(r.success, expect == flat[a]);
          if (r.success) flat[a] = 42;
          break;
        }
        default: {
          std::array<std::uint8_t, 8> buf{};
          fab.load(n, a, buf);
          ASSERT_EQ(load_u64(buf.data()), flat[a]) << "seed " << seed << " step " << step;
        }
      }
      if (step % 500 == 0) ASSERT_EQ(fab.check_invariants(), "");
    }
    ASSERT_EQ(fab.check_invariants(), "");
  }
}

TEST(VanillaCoherence, FaaFromFourNodesCountsTo400) {
  Fabric fab(fixtures::small_fabric(4));
  Addr counter = fab.cxl_alloc(0, kLineSize, Primitive::Vanilla);
  Scheduler sched;
  std::vector<std::unique_ptr<MemPort>> ports;
  for (NodeId n = 0; n < 4; ++n) {
    std::size_t slot = sched.add_worker({n, 0});
    ports.push_back(std::make_unique<MemPort>(fab, sched, slot));
  }
  std::vector<std::uint64_t> olds;
  auto body = [&](MemPort& p) -> Task<void> {
    for (int i = 0; i < 100; ++i) {
      RmwResult r = co_await p.faa(counter, 1);
      olds.push_back(r.old_value);
      p.compute(10 + p.node());
    }
  };
  for (std::size_t s = 0; s < 4; ++s) sched.spawn(s, body(*ports[s]));
  sched.run();
  EXPECT_EQ(load_u64(fab.view(0, counter).data()), 400u);
  std::sort(olds.begin(), olds.end());
  for (std::uint64_t i = 0; i < 400; ++i) ASSERT_EQ(olds[i], i);
  EXPECT_EQ(fab.check_invariants(), "");
}

TEST(VanillaCoherence, AtomicsRequireEightByteAlignment) {
  Fabric fab(fixtures::small_fabric(2));
  Addr a = fab.cxl_alloc(0, kLineSize, Primitive::Vanilla);
  EXPECT_THROW(fab.faa(0, a + 4, 1), AlignmentError);
}

TEST(VanillaCoherence, RecordTrafficClassifiedSeparately) {
  Fabric fab(fixtures::small_fabric(2));
  Addr meta = fab.cxl_alloc(0, kLineSize, Primitive::Vanilla);
  Addr rec = fab.cxl_alloc(0, kLineSize, Primitive::Vanilla, TrafficClass::Record);
  fab.store(0, rec, word(1));
  std::array<std::uint8_t, 8> buf{};
  fab.load(1, rec, buf);
  fab.load(1, meta, buf);
  const VanillaStats& s = fab.vanilla().stats();
  EXPECT_EQ(s.record().remote_signals, 1u);
  EXPECT_EQ(s.meta().remote_signals, 0u);
  EXPECT_EQ(s.meta().loads, 1u);
}
