#include <gtest/gtest.h>

#include <chrono>
#include <cstdio>
#include <fstream>

#include "gfam/error.hpp"
#include "gfam/harness.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace gfam;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Config, ParsesKeysCommentsAndWhitespace) {
  RunConfig c = parse_config(
      "# comment\n"
      "nodes = 4\n"
      "  mode=vanilla  \n"
      "txn.algorithm = wait_die\n"
      "ycsb.theta = 0.5   # trailing\n"
      "profile = numa\n"
      "txn.history = false\n");
  EXPECT_EQ(c.nodes, 4u);
  EXPECT_EQ(c.mode, Mode::Vanilla);
  EXPECT_EQ(c.algorithm, CcAlgorithm::WaitDie);
  EXPECT_DOUBLE_EQ(c.ycsb.theta, 0.5);
  EXPECT_EQ(c.latency_profile().c2m_ns, 145u);
  EXPECT_FALSE(c.history);
}

TEST(Config, ErrorsNameTheKey) {
  EXPECT_NE(error_of("no.such.key = 1").find("no.such.key"), std::string::npos);
  EXPECT_NE(error_of("nodes = many").find("nodes"), std::string::npos);
  EXPECT_NE(error_of("nodes = 17").find("nodes"), std::string::npos);
  EXPECT_NE(error_of("ycsb.theta = -1").find("ycsb.theta"), std::string::npos);
  EXPECT_NE(error_of("cache.capacity = 1000").find("cache.capacity"), std::string::npos);
  EXPECT_NE(error_of("profile = custom\nprofile.dram_ns = -3").find("profile.dram_ns"), std::string::npos);
  EXPECT_NE(error_of("txn.history = maybe").find("txn.history"), std::string::npos);
  EXPECT_NE(error_of("nodes 4").find("line 1"), std::string::npos);
  EXPECT_THROW(load_config("/nonexistent/gfam.conf"), ConfigError);
}

TEST(Config, EntriesRoundTripThroughParser) {
  RunConfig c = fixtures::small_run();
  c.algorithm = CcAlgorithm::Occ;
  c.ycsb.write_ratio = 0.3;
  c.profile = "custom";
  c.custom.c2m_ns = 77;
  std::string text;
  for (const auto& [k, v] : c.entries()) text += k + " = " + v + "\n";
  RunConfig d = parse_config(text);
  EXPECT_EQ(d.entries(), c.entries());
  EXPECT_EQ(d.latency_profile().c2m_ns, 77u);
  EXPECT_EQ(config_keys().size(), c.entries().size());
}

TEST(Report, JsonAndCsvRoundTrip) {
  RunConfig c = fixtures::small_run();
  c.txns = 100;
  RunReport r = run_bench(c);
  RunReport from_json = report_from_json(to_json(r));
  EXPECT_EQ(from_json, r);
  EXPECT_EQ(to_json(from_json), to_json(r));
  RunReport from_csv = report_from_csv(to_csv(r));
  EXPECT_EQ(from_csv, r);

  auto j = nlohmann::json::parse(to_json(r));
  EXPECT_EQ(j["config"]["algorithm"], "SILO");
  EXPECT_EQ(j["txn"]["commits"], 100);
  EXPECT_TRUE(j["traffic"]["record"].contains("remote_signals"));
  EXPECT_THROW(report_from_json("{\"schema\": 3}"), Error);
}

TEST(Report, SameSeedGivesByteIdenticalJson) {
  for (Mode m : {Mode::Ctxnl, Mode::Vanilla}) {
    RunConfig c = fixtures::small_run(2, 3);
    c.mode = m;
    c.ycsb.theta = 0.99;
    std::string a = to_json(run_bench(c));
    std::string b = to_json(run_bench(c));
    EXPECT_EQ(a, b);
    c.seed = 2;
    EXPECT_NE(to_json(run_bench(c)), a);
  }
}

TEST(Report, CompareTableHasRatios) {
  RunConfig c = fixtures::small_run();
  c.txns = 100;
  RunReport x = run_bench(c);
  c.mode = Mode::Vanilla;
  RunReport v = run_bench(c);
  std::string t = compare_reports({{"ctxnl", x}, {"vanilla", v}});
  EXPECT_NE(t.find("throughput_tps"), std::string::npos);
  EXPECT_NE(t.find("ratio1"), std::string::npos);
}

TEST(Bench, RunsOnlyOnce) {
  RunConfig c = fixtures::small_run();
  c.txns = 10;
  Bench b(c);
  b.run();
  EXPECT_THROW(b.run(), ConfigError);
  EXPECT_EQ(b.latencies().count(), 10u);
}

TEST(Litmus, ClassificationsHoldUnderEvictionsWithinOneSecond) {
  auto t0 = std::chrono::steady_clock::now();
  LitmusReport r = run_litmus(true);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_TRUE(r.pass()) << r.to_text();
  EXPECT_LT(secs, 1.0);
  ASSERT_EQ(r.cases.size(), 6u);
  auto find = [&](const std::string& prog, Mode m) -> const LitmusCase& {
    for (const auto& c : r.cases)
      if (c.program == prog && c.mode == m) return c;
    throw std::runtime_error("missing case");
  };
  EXPECT_TRUE(find("local-stores", Mode::Ctxnl).reachable.count({1, 0, 1, 0}));
  EXPECT_FALSE(find("local-stores", Mode::Vanilla).reachable.count({1, 0, 1, 0}));
  EXPECT_FALSE(find("gsync-publish", Mode::Ctxnl).reachable.count({1, 0, 1, 0}));
  for (const auto& o : find("wd-withdraw", Mode::Ctxnl).reachable) EXPECT_FALSE(o[2] == 1 && o[3] == 1);
  EXPECT_EQ(find("local-stores", Mode::Ctxnl).interleavings, 20u);
}

TEST(VatSweep, SmallTableRowsAreMonotoneInOccupancy) {
  SweepConfig s;
  s.entries_per_table = 16 * 1024;
  s.cache.capacity_bytes = 64 * 1024;
  s.window_bytes = 64 * 1024;
  SweepResult r = run_vat_sweep(s);
  ASSERT_GT(r.rows.size(), 3u);
  for (std::size_t i = 1; i < r.rows.size(); ++i) EXPECT_GE(r.rows[i].occupancy, r.rows[i - 1].occupancy);
  EXPECT_GT(r.occupancy_at_failure, 0.5);
  EXPECT_LE(r.retries_below_threshold.percentile(99), 6u);
  EXPECT_GT(r.capacity_bytes, r.p99_capacity_bytes);
  EXPECT_NE(r.to_csv().find("retries_p99"), std::string::npos);
}
