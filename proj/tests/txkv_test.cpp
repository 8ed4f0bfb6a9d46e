#include <gtest/gtest.h>

#include <algorithm>

#include "gfam/error.hpp"
#include "gfam/harness.hpp"
#include "support.hpp"

using namespace gfam;

namespace {

CommittedTxn txn(std::uint64_t id, std::vector<ReadRecord> reads, std::vector<WriteRecord> writes) {
  CommittedTxn t;
  t.id = id;
  t.reads = std::move(reads);
  t.writes = std::move(writes);
  return t;
}

const Mode kModes[] = {Mode::Ctxnl, Mode::Vanilla};
const CcAlgorithm kAlgos[] = {CcAlgorithm::Silo, CcAlgorithm::Occ, CcAlgorithm::NoWait, CcAlgorithm::WaitDie};

}  // namespace

TEST(Serializability, SerialHistoryPasses) {
  std::vector<CommittedTxn> h{
      txn(1, {{10, 0, 0}}, {{10, 1, 0xa}}),
      txn(2, {{10, 1, 0xa}, {11, 0, 0}}, {{11, 1, 0xb}, {10, 2, 0xb}}),
      txn(3, {{11, 1, 0xb}}, {}),
  };
  SerializabilityResult r = check_serializable(h);
  EXPECT_TRUE(r.ok) << r.reason;
  EXPECT_GT(r.edges, 0u);
}

TEST(Serializability, WriteSkewIsATwoCycle) {
  // Both read x and y at their initial versions; one writes x, the other y.
  std::vector<CommittedTxn> h{
      txn(1, {{1, 0, 0}, {2, 0, 0}}, {{1, 1, 0x100}}),
      txn(2, {{1, 0, 0}, {2, 0, 0}}, {{2, 1, 0x200}}),
  };
  SerializabilityResult r = check_serializable(h);
  ASSERT_FALSE(r.ok);
  ASSERT_EQ(r.cycle.size(), 2u);
  std::vector<std::uint64_t> c = r.cycle;
  std::sort(c.begin(), c.end());
  EXPECT_EQ(c, (std::vector<std::uint64_t>{1, 2}));
}

TEST(Serializability, ShortestCycleReportedInLongerHistory) {
  // 1 -> 2 -> 3 -> 1 through rw edges, plus an unrelated serial tail.
  std::vector<CommittedTxn> h{
      txn(1, {{2, 0, 0}}, {{1, 1, 1}}),
      txn(2, {{3, 0, 0}}, {{2, 1, 2}}),
      txn(3, {{1, 0, 0}}, {{3, 1, 3}}),
      txn(4, {{1, 1, 1}}, {{9, 1, 4}}),
  };
  SerializabilityResult r = check_serializable(h);
  ASSERT_FALSE(r.ok);
  EXPECT_EQ(r.cycle.size(), 3u);
}

TEST(Serializability, DuplicateVersionAndPhantomReadsRejected) {
  EXPECT_FALSE(check_serializable({txn(1, {}, {{5, 1, 1}}), txn(2, {}, {{5, 1, 2}})}).ok);
  EXPECT_FALSE(check_serializable({txn(1, {{5, 3, 0}}, {})}).ok);
  // Version 1 exists but the reader saw different bytes.
  SerializabilityResult r = check_serializable({txn(1, {}, {{5, 1, 7}}), txn(2, {{5, 1, 8}}, {})});
  EXPECT_FALSE(r.ok);
  EXPECT_NE(r.reason.find("differ"), std::string::npos);
}

TEST(Record, FormatCarriesStampAndKeyAndChainsPriorBytes) {
  std::vector<std::uint8_t> prior(200, 0), a(200), b(200);
  make_record(a, 0x55, 9, prior);
  EXPECT_EQ(record_stamp(a), 0x55u);
  EXPECT_EQ(load_u64(a.data() + 8), 9u);
  EXPECT_EQ(a, fixtures::oracle_record(0x55, 9, prior));
  make_record(b, 0x55, 9, a);
  EXPECT_NE(a, b);
  EXPECT_EQ(b, fixtures::oracle_record(0x55, 9, a));
}

TEST(Database, NamesParseAndRoundTrip) {
  for (CcAlgorithm a : kAlgos) EXPECT_EQ(parse_algorithm(to_string(a)), a);
  EXPECT_EQ(parse_algorithm("no-wait"), CcAlgorithm::NoWait);
  EXPECT_EQ(parse_mode("vanilla"), Mode::Vanilla);
  EXPECT_THROW(parse_algorithm("2PL"), ConfigError);
  EXPECT_THROW(parse_mode("strict"), ConfigError);
}

TEST(Database, LoadPlacesRecordsAndRejectsBadRecordSize) {
  Fabric fab(fixtures::small_fabric(2));
  DbConfig c;
  c.record_size = 100;
  Database db(fab, c);
  EXPECT_EQ(db.payload_lines(), 2u);
  db.load_range(50);
  EXPECT_EQ(db.size(), 50u);
  const Tuple& t = db.tuple(7);
  EXPECT_EQ(fab.segments().segment_of(t.payload), Segment::Ctxnl);
  EXPECT_EQ(fab.segments().segment_of(t.header), Segment::Vanilla);
  EXPECT_EQ(db.lock_scan(), "");
  c.record_size = 0;
  EXPECT_THROW(Database(fab, c), ConfigError);
}

// The sequential oracle: a zero-latency single worker must leave exactly the
// bytes that replaying its transactions on a map produces.
TEST(GoldenOracle, YcsbSingleWorkerMatchesSequentialReplay) {
  for (Mode m : kModes)
    for (CcAlgorithm a : kAlgos) {
      RunConfig c = fixtures::zero_latency(fixtures::small_run());
      c.mode = m;
      c.algorithm = a;
      c.ycsb.records = 300;
      c.txns = 300;
      EXPECT_EQ(fixtures::golden_mismatch(c), "") << to_string(m) << " " << to_string(a);
    }
}

TEST(GoldenOracle, TpccSingleWorkerMatchesSequentialReplay) {
  for (Mode m : kModes) {
    RunConfig c = fixtures::zero_latency(fixtures::small_run());
    c.workload = WorkloadKind::Tpcc;
    c.mode = m;
    c.algorithm = CcAlgorithm::NoWait;
    c.txns = 200;
    EXPECT_EQ(fixtures::golden_mismatch(c), "") << to_string(m);
  }
}

// Property: under contention every algorithm in both modes commits a
// serializable history and leaves no locks or uncommitted bytes behind.
TEST(Concurrency, AllAlgorithmsStaySerializableUnderContention) {
  for (Mode m : kModes)
    for (CcAlgorithm a : kAlgos)
      for (std::uint64_t seed : {1, 2}) {
        RunConfig c = fixtures::small_run(2, 3);
        c.mode = m;
        c.algorithm = a;
        c.seed = seed;
        c.ycsb.records = 200;
        c.ycsb.theta = 0.99;
        c.ycsb.ops_per_txn = 8;
        RunReport r = run_bench(c);
        SCOPED_TRACE(std::string(to_string(m)) + " " + to_string(a) + " seed " + std::to_string(seed));
        EXPECT_EQ(r.commits, c.txns);
        EXPECT_EQ(r.serializable, 1u) << r.check_detail;
        EXPECT_EQ(r.hygiene_clean, 1u) << r.check_detail;
        EXPECT_EQ(r.locks_clean, 1u) << r.check_detail;
        EXPECT_EQ(r.invariants_clean, 1u) << r.check_detail;
        EXPECT_GT(r.aborts_validation + r.aborts_lock + r.aborts_wait_die, 0u);
      }
}

TEST(Concurrency, AbortReasonsMatchAlgorithm) {
  auto run = [](CcAlgorithm a) {
    RunConfig c = fixtures::small_run(2, 3);
    c.algorithm = a;
    c.ycsb.records = 200;
    c.ycsb.theta = 0.99;
    return run_bench(c);
  };
  RunReport silo = run(CcAlgorithm::Silo);
  EXPECT_EQ(silo.aborts_lock + silo.aborts_wait_die, 0u);
  RunReport nw = run(CcAlgorithm::NoWait);
  EXPECT_GT(nw.aborts_lock, 0u);
  EXPECT_EQ(nw.aborts_wait_die, 0u);
  RunReport wd = run(CcAlgorithm::WaitDie);
  EXPECT_GT(wd.aborts_wait_die, 0u);
}

TEST(Concurrency, CtxnlKeepsRecordLinesOffTheVanillaDatapath) {
  RunConfig c = fixtures::small_run(2, 2);
  RunReport x = run_bench(c);
  EXPECT_EQ(x.record_coherence_events_vanilla, 0u);
  EXPECT_GT(x.gsync, 0u);
  c.mode = Mode::Vanilla;
  RunReport v = run_bench(c);
  EXPECT_GT(v.record_coherence_events_vanilla, 0u);
  EXPECT_EQ(v.gsync, 0u);
}

TEST(Concurrency, TpccRunPassesChecks) {
  for (Mode m : kModes) {
    RunConfig c = fixtures::small_run(2, 2);
    c.workload = WorkloadKind::Tpcc;
    c.mode = m;
    c.tpcc.remote_prob = 0.2;
    RunReport r = run_bench(c);
    EXPECT_EQ(r.serializable, 1u) << r.check_detail;
    EXPECT_EQ(r.hygiene_clean, 1u) << r.check_detail;
    EXPECT_EQ(r.locks_clean, 1u) << r.check_detail;
  }
}
