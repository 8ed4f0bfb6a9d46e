#include <cstdio>
#include <sstream>

#include "gfam/harness.hpp"

namespace gfam {

SweepResult run_vat_sweep(const SweepConfig& cfg) {
  ViewShimConfig sc;
  sc.vat.tables = cfg.tables;
  sc.vat.entries_per_table = cfg.entries_per_table;
  sc.vat.max_retries = cfg.max_retries;
  ViewShim shim(sc, 1, cfg.seed);
  NodeCache cache(cfg.cache, cfg.seed, 0);
  Rng rng(cfg.seed, 0x5eeb);

  const std::uint64_t slots = std::uint64_t{cfg.tables} * cfg.entries_per_table;
  const std::uint64_t line_mask = (std::uint64_t{1} << 52) - 1;
  const std::uint64_t limit = 4 * slots + cache.config().lines();
  SweepResult res;
  Histogram window;
  std::uint64_t live = 0;
  std::uint64_t next_mark = cfg.window_bytes;
  bool p99_broken = false;

  for (std::uint64_t i = 0; i < limit; ++i) {
    Addr line = (rng.next() & line_mask) * kLineSize;
    if (cache.peek(line)) continue;
    LineData d{};
    store_u64(d.data(), i + 1);
    FillResult fr = cache.fill(line, LineState::Modified, d);
    if (fr.victim && fr.victim->state == LineState::Modified) {
      double occ = static_cast<double>(live) / static_cast<double>(slots);
      VatInsertResult r = shim.vat_insert(0, fr.victim->tag / kLineSize, fr.victim->data);
      ++res.inserts;
      if (r.status == InsertStatus::ResizeRequired) {
        res.capacity_bytes = (live + cache.occupancy()) * kLineSize;
        res.occupancy_at_failure = occ;
        break;
      }
      if (!r.updated) ++live;
      window.add(r.retries);
      if (occ <= 0.6) res.retries_below_threshold.add(r.retries);
    }
    std::uint64_t pending = (live + cache.occupancy()) * kLineSize;
    if (pending >= next_mark && window.count() > 0) {
      SweepRow row{pending, static_cast<double>(live) / static_cast<double>(slots), window.count(),
                   window.percentile(50), window.percentile(99), window.max()};
      if (row.retries_p99 > 6) p99_broken = true;
      if (!p99_broken) res.p99_capacity_bytes = pending;
      res.rows.push_back(row);
      window.clear();
      next_mark += cfg.window_bytes;
    }
  }
  if (window.count() > 0) {
    std::uint64_t pending = (live + cache.occupancy()) * kLineSize;
    res.rows.push_back({pending, static_cast<double>(live) / static_cast<double>(slots), window.count(),
                        window.percentile(50), window.percentile(99), window.max()});
  }
  return res;
}

std::string SweepResult::to_csv() const {
  std::ostringstream s;
  s << "pending_bytes,occupancy,inserts,retries_p50,retries_p99,retries_max\n";
  char buf[32];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.6f", r.occupancy);
    s << r.pending_bytes << "," << buf << "," << r.inserts << "," << r.retries_p50 << "," << r.retries_p99 << ","
      << r.retries_max << "\n";
  }
  return s.str();
}

}  // namespace gfam
