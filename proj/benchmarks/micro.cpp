#include <benchmark/benchmark.h>

#include <array>

#include "gfam/harness.hpp"

using namespace gfam;

namespace {

FabricConfig bench_fabric() {
  FabricConfig f;
  f.nodes = 4;
  f.shim.vat.entries_per_table = 1 << 16;
  f.capacity = 256 << 20;
  return f;
}

void BM_ZipfSample(benchmark::State& st) {
  ZipfGenerator z(1'000'000, static_cast<double>(st.range(0)) / 100.0);
  Rng rng(1, 0);
  for (auto _ : st) benchmark::DoNotOptimize(z.sample(rng));
}
BENCHMARK(BM_ZipfSample)->Arg(0)->Arg(90)->Arg(99);

void BM_VatInsert(benchmark::State& st) {
  const double target = static_cast<double>(st.range(0)) / 100.0;
  VatConfig c;
  c.entries_per_table = 1 << 18;
  c.lut_bits = 4;
  for (auto _ : st) {
    st.PauseTiming();
    ViewAddressTable vat(c, 1);
    Rng rng(2, 2);
    LineData d{};
    const auto n = static_cast<std::uint64_t>(target * static_cast<double>(c.entries_per_table));
    st.ResumeTiming();
    for (std::uint64_t i = 0; i < n; ++i) vat.insert_absent(rng.next() >> 12, d.data());
  }
  st.SetItemsProcessed(st.iterations() *
                       static_cast<std::int64_t>(target * static_cast<double>(c.entries_per_table)));
}
BENCHMARK(BM_VatInsert)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_BloomQuery(benchmark::State& st) {
  BloomFilter vf(512, 2, 1);
  for (std::uint64_t k = 0; k < 1400; ++k) vf.insert(k * 31);
  std::uint64_t k = 0;
  for (auto _ : st) benchmark::DoNotOptimize(vf.query(++k));
}
BENCHMARK(BM_BloomQuery);

void BM_VanillaLoadPingPong(benchmark::State& st) {
  Fabric fab(bench_fabric());
  Addr a = fab.cxl_alloc(0, kLineSize, Primitive::Vanilla);
  std::array<std::uint8_t, 8> b{};
  NodeId n = 0;
  for (auto _ : st) {
    fab.store(n, a, b);
    n = (n + 1) % 4;
  }
}
BENCHMARK(BM_VanillaLoadPingPong);

void BM_CtxnlStoreGSync(benchmark::State& st) {
  Fabric fab(bench_fabric());
  Addr a = fab.cxl_alloc(0, 64 * kLineSize, Primitive::Ctxnl, TrafficClass::Record);
  std::array<std::uint8_t, 8> b{};
  std::uint64_t i = 0;
  for (auto _ : st) {
    Addr line = a + (i++ % 64) * kLineSize;
    NodeId n = static_cast<NodeId>(i % 4);
    fab.l_store(n, line, b);
    fab.gsync(n, std::span<const Addr>(&line, 1));
  }
}
BENCHMARK(BM_CtxnlStoreGSync);

void BM_YcsbRun(benchmark::State& st) {
  RunConfig c;
  c.nodes = 4;
  c.ycsb.records = 100'000;
  c.txns = 2000;
  c.mode = st.range(0) ? Mode::Vanilla : Mode::Ctxnl;
  c.check = false;
  c.history = false;
  for (auto _ : st) benchmark::DoNotOptimize(run_bench(c).throughput_tps);
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(c.txns));
}
BENCHMARK(BM_YcsbRun)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
