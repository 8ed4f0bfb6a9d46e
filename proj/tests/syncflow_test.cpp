#include <gtest/gtest.h>

#include <array>

#include "gfam/error.hpp"
#include "gfam/fabric.hpp"
#include "support.hpp"

using namespace gfam;

namespace {

std::array<std::uint8_t, 8> word(std::uint64_t v) {
  std::array<std::uint8_t, 8> b{};
  store_u64(b.data(), v);
  return b;
}

std::uint64_t l_read(Fabric& fab, NodeId n, Addr a) {
  std::array<std::uint8_t, 8> b{};
  fab.l_load(n, a, b);
  return load_u64(b.data());
}

std::uint64_t ems(const Fabric& fab, Addr a) {
  std::array<std::uint8_t, 8> b{};
  fab.peek_dram(a, b);
  return load_u64(b.data());
}

}  // namespace

TEST(QueuePair, PostConsumeCompleteAcknowledge) {
  QueuePair q(4);
  std::array<Addr, 3> lines{0, 64, 128};
  auto seqs = q.post(SyncOp::GSync, lines);
  EXPECT_EQ(seqs, (std::vector<std::uint64_t>{0, 1, 2}));
  EXPECT_EQ(q.free_slots(), 1u);
  EXPECT_FALSE(q.ready(seqs));
  while (auto e = q.consume()) q.complete(e->seq);
  EXPECT_TRUE(q.ready(seqs));
  // Consumed ring slots are reusable, but completion bits are held until acknowledged.
  EXPECT_EQ(q.outstanding(), 3u);
  q.acknowledge(seqs);
  EXPECT_EQ(q.outstanding(), 0u);
  EXPECT_EQ(q.completion().count(), 0u);
}

TEST(QueuePair, FullRingRaisesBackpressure) {
  QueuePair q(2);
  std::array<Addr, 3> lines{0, 64, 128};
  EXPECT_THROW(q.post(SyncOp::Wd, lines), BackpressureError);
  std::array<Addr, 1> bad{3};
  EXPECT_THROW(q.post(SyncOp::Wd, bad), AlignmentError);
}

TEST(Ctxnl, LocalStoreStaysPrivateUntilGSync) {
  Fabric fab(fixtures::small_fabric(2));
  Addr a = fab.cxl_alloc(0, kLineSize, Primitive::Ctxnl, TrafficClass::Record);
  EXPECT_EQ(l_read(fab, 1, a), 0u);
  fab.l_store(0, a, word(11));
  EXPECT_EQ(l_read(fab, 0, a), 11u);
  EXPECT_EQ(l_read(fab, 1, a), 0u);
  EXPECT_EQ(ems(fab, a), 0u);

  Breakdown g = fab.gsync(0, std::span<const Addr>(&a, 1));
  EXPECT_GT(g.total(), 0u);
  EXPECT_EQ(ems(fab, a), 11u);
  // Node 1 held a stale copy; the GSync back-invalidated it.
  EXPECT_EQ(l_read(fab, 1, a), 11u);
  EXPECT_EQ(fab.sync().stats().gsync_count, 1u);
  EXPECT_GE(fab.sync().stats().peer_invalidations, 1u);
  EXPECT_EQ(fab.check_invariants(), "");
}

TEST(Ctxnl, WdDiscardsUnpublishedStores) {
  Fabric fab(fixtures::small_fabric(2));
  Addr a = fab.cxl_alloc(0, kLineSize, Primitive::Ctxnl, TrafficClass::Record);
  fab.l_store(0, a, word(5));
  fab.gsync(0, std::span<const Addr>(&a, 1));
  fab.l_store(0, a, word(6));
  EXPECT_EQ(l_read(fab, 0, a), 6u);
  fab.wd(0, std::span<const Addr>(&a, 1));
  EXPECT_EQ(l_read(fab, 0, a), 5u);
  EXPECT_EQ(ems(fab, a), 5u);
  EXPECT_EQ(fab.sync().stats().wd_count, 1u);
}

TEST(Ctxnl, OverflowedViewSurvivesEvictionAndMergesOnGSync) {
  Fabric fab(fixtures::small_fabric(2));
  Addr a = fab.cxl_alloc(0, kLineSize, Primitive::Ctxnl, TrafficClass::Record);
  fab.l_store(0, a, word(21));
  fab.evict(0, a);
  EXPECT_FALSE(fab.caches()[0].lookup(a));
  EXPECT_EQ(fab.shim().live_views(0), 1u);
  EXPECT_EQ(ems(fab, a), 0u);
  EXPECT_EQ(l_read(fab, 0, a), 21u);
  EXPECT_EQ(l_read(fab, 1, a), 0u);
  fab.evict_all(0);
  fab.gsync(0, std::span<const Addr>(&a, 1));
  EXPECT_EQ(ems(fab, a), 21u);
  EXPECT_EQ(fab.shim().live_views(0), 0u);
  EXPECT_EQ(fab.sync().stats().merge_vms, 1u);
  EXPECT_EQ(fab.check_invariants(), "");
}

TEST(Ctxnl, WdDropsOverflowedView) {
  Fabric fab(fixtures::small_fabric(2));
  Addr a = fab.cxl_alloc(0, kLineSize, Primitive::Ctxnl, TrafficClass::Record);
  fab.l_store(0, a, word(3));
  fab.evict(0, a);
  fab.wd(0, std::span<const Addr>(&a, 1));
  EXPECT_EQ(fab.shim().live_views(0), 0u);
  EXPECT_EQ(l_read(fab, 0, a), 0u);
  EXPECT_EQ(fab.check_invariants(), "");
}

TEST(Ctxnl, GSyncWithoutPendingStoreChangesNothing) {
  Fabric fab(fixtures::small_fabric(2));
  Addr a = fab.cxl_alloc(0, kLineSize, Primitive::Ctxnl, TrafficClass::Record);
  fab.gsync(1, std::span<const Addr>(&a, 1));
  EXPECT_EQ(fab.sync().stats().merge_none, 1u);
  EXPECT_EQ(ems(fab, a), 0u);
}

TEST(Ctxnl, PrimitivesBoundToSegments) {
  Fabric fab(fixtures::small_fabric(2));
  Addr v = fab.cxl_alloc(0, kLineSize, Primitive::Vanilla);
  Addr c = fab.cxl_alloc(0, kLineSize, Primitive::Ctxnl);
  std::array<std::uint8_t, 8> b{};
  EXPECT_THROW(fab.l_store(0, v, b), PrimitiveBindingError);
  EXPECT_THROW(fab.l_load(0, v, b), PrimitiveBindingError);
  EXPECT_THROW(fab.store(0, c, b), PrimitiveBindingError);
  EXPECT_THROW(fab.gsync(0, std::span<const Addr>(&v, 1)), PrimitiveBindingError);
}

TEST(Ctxnl, ManyLinesInOneGSyncBatch) {
  FabricConfig f = fixtures::small_fabric(2);
  f.queue_depth = 8;
  Fabric fab(f);
  Addr base = fab.cxl_alloc(0, 20 * kLineSize, Primitive::Ctxnl, TrafficClass::Record);
  std::vector<Addr> lines;
  for (int i = 0; i < 20; ++i) {
    lines.push_back(base + i * kLineSize);
    fab.l_store(0, lines.back(), word(100 + i));
  }
  fab.gsync(0, lines);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(ems(fab, lines[i]), 100u + i);
  EXPECT_EQ(fab.sync().stats().gsync_count, 20u);
  EXPECT_EQ(fab.check_invariants(), "");
}
