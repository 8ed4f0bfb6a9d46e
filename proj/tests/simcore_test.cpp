#include <gtest/gtest.h>

#include <set>

#include "gfam/error.hpp"
#include "gfam/simcore.hpp"
#include "gfam/stats.hpp"

using namespace gfam;

TEST(Profiles, PresetLatenciesMatchPublishedTable) {
  struct Row {
    const char* name;
    SimTime c2m, c2c;
  };
  for (const Row& r : {Row{"socket", 92, 49}, Row{"numa", 145, 133}, Row{"cxl-ideal", 170, 246},
                       Row{"cxl-proto", 456, 847}}) {
    LatencyProfile p = make_profile(r.name);
    EXPECT_EQ(p.c2m_ns, r.c2m) << r.name;
    EXPECT_EQ(p.c2c_ns, r.c2c) << r.name;
    EXPECT_EQ(p.name, r.name);
  }
}

TEST(Profiles, ProtoLinkRoundtripMakesSfEvictionCostly) {
  LatencyProfile p = make_profile(ProfileKind::CxlProto);
  EXPECT_EQ(3 * p.link_rt_ns, 1260u);
  EXPECT_GT(3 * p.link_rt_ns, p.c2c_ns);
}

TEST(Profiles, UnknownPresetAndNegativeCustomRejected) {
  EXPECT_THROW(make_profile("warp-drive"), ConfigError);
  CustomProfileParams c;
  c.dram_ns = -1;
  try {
    make_profile(c);
    FAIL() << "negative latency accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("profile.dram_ns"), std::string::npos);
  }
  c.dram_ns = 0;
  c.bus_bytes_per_ns = 0;
  EXPECT_THROW(make_profile(c), ConfigError);
}

TEST(Rng, SameSeedAndStreamRepeat) {
  Rng a(7, 3), b(7, 3), c(7, 4);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    std::uint64_t x = a.next();
    EXPECT_EQ(x, b.next());
    differs |= x != c.next();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, BelowStaysInRangeAndCoversIt) {
  Rng r(1, 0);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 10000; ++i) {
    std::uint64_t v = r.below(17);
    ASSERT_LT(v, 17u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 17u);
  for (int i = 0; i < 1000; ++i) {
    double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(SimClock, ChargeAndAdvanceNeverGoBackwards) {
  SimClock c(3);
  c.charge(0, 100);
  c.charge(1, 40);
  EXPECT_EQ(c.advance_to(1, 20), 40u);
  EXPECT_EQ(c.advance_to(1, 70), 70u);
  EXPECT_EQ(c.max_time(), 100u);
  EXPECT_EQ(c.min_time(), 0u);
  EXPECT_EQ(c.events(), 2u);
}

TEST(Arbitrate, OrdersByTimestampNodeWorkerAndKeepsTies) {
  std::vector<EndpointRequest> in{
      {10, 1, 0, 0x40, 1}, {5, 2, 0, 0x80, 2}, {10, 0, 1, 0xc0, 3}, {10, 0, 0, 0x100, 4}, {10, 0, 0, 0x140, 5}};
  auto out = arbitrate(in);
  std::vector<std::uint64_t> tags;
  for (const auto& r : out) tags.push_back(r.tag);
  EXPECT_EQ(tags, (std::vector<std::uint64_t>{2, 4, 5, 3, 1}));
}

TEST(Histogram, NearestRankPercentiles) {
  Histogram h;
  for (std::uint64_t v = 1; v <= 100; ++v) h.add(v);
  EXPECT_EQ(h.percentile(50), 50u);
  EXPECT_EQ(h.percentile(99), 99u);
  EXPECT_EQ(h.percentile(100), 100u);
  EXPECT_EQ(h.percentile(0), 1u);
  EXPECT_DOUBLE_EQ(h.mean(), 50.5);
  Histogram g;
  g.add(7, 3);
  h.merge(g);
  EXPECT_EQ(h.count(), 103u);
  EXPECT_EQ(Histogram{}.percentile(99), 0u);
}

TEST(Breakdown, TotalSumsComponents) {
  Breakdown a{1, 2, 3, 4};
  a += Breakdown{10, 0, 0, 1};
  EXPECT_EQ(a.total(), 21u);
  EXPECT_EQ(a.dram, 11u);
}
