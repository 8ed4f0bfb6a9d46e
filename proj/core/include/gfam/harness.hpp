#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gfam/fabric.hpp"
#include "gfam/memport.hpp"
#include "gfam/scheduler.hpp"
#include "gfam/stats.hpp"
#include "gfam/txkv.hpp"
#include "gfam/workloads.hpp"

namespace gfam {

// ---------------------------------------------------------------------------
// Run configuration (flat key=value text)

enum class WorkloadKind : std::uint8_t { Ycsb, Tpcc };

struct RunConfig {
  std::uint32_t nodes = 8;
  std::uint32_t workers_per_node = 2;
  Mode mode = Mode::Ctxnl;
  CcAlgorithm algorithm = CcAlgorithm::Silo;
  std::string profile = "cxl-proto";
  CustomProfileParams custom;  // used when profile == "custom"
  CacheConfig cache;
  SnoopFilterConfig sf;
  ViewShimConfig shim;
  ResizePolicy resize;
  std::uint32_t queue_depth = 256;
  std::uint64_t capacity = std::uint64_t{4} << 30;
  std::uint64_t chunk_bytes = 64 * 1024;
  WorkloadKind workload = WorkloadKind::Ycsb;
  YcsbParams ycsb;
  TpccLiteParams tpcc;
  std::uint64_t txns = 10'000;
  std::uint64_t seed = 1;
  SimTime cpu_op_ns = 50;
  SimTime backoff_ns = 1000;
  bool history = true;
  bool check = true;

  // Throws ConfigError naming the key on an unknown key or a bad value.
  void set(std::string_view key, std::string_view value);
  void validate() const;
  // Every key with its current value, in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;

  LatencyProfile latency_profile() const;
  FabricConfig fabric_config() const;
  DbConfig db_config() const;
  TpccLiteParams tpcc_params() const;
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);
std::vector<std::string> config_keys();

// ---------------------------------------------------------------------------
// Run report

struct RunReport {
  std::string schema = "gfam-report/1";
  std::string mode, algorithm, workload, profile;
  std::uint64_t nodes = 0, workers = 0, txns = 0, seed = 0, record_size = 0;

  std::uint64_t commits = 0;
  std::uint64_t aborts_validation = 0, aborts_lock = 0, aborts_wait_die = 0;
  std::uint64_t span_ns = 0;
  double throughput_tps = 0;
  double abort_rate = 0;
  std::uint64_t latency_p50_ns = 0, latency_p99_ns = 0, latency_max_ns = 0;
  double latency_mean_ns = 0;

  TrafficCounters record, meta;
  std::uint64_t gsync = 0, wd = 0, sync_batches = 0, peer_bi_sent = 0, peer_invalidations = 0, self_bi = 0,
                bus_bytes = 0, merge_on_chip = 0, merge_vms = 0, merge_none = 0, backpressure_events = 0;
  // Record-line remote signals and BIs on the vanilla datapath plus GSync peer BIs.
  std::uint64_t record_coherence_events = 0;
  // The vanilla-datapath part alone.
  std::uint64_t record_coherence_events_vanilla = 0;

  std::uint64_t dram_ns = 0, remote_signal_ns = 0, sf_bi_ns = 0, ep_logic_ns = 0, gfam_total_ns = 0;

  std::uint64_t translate_loads = 0, vf_negative = 0, vf_false_positive = 0, vms_hits = 0, vms_overflow_count = 0,
                vat_updates = 0, vat_invalidations = 0, vf_rebuilds = 0, vbf_inserts = 0, vbf_removes = 0,
                resize_required = 0, vat_retries_p99 = 0;
  double vf_sift_rate = 0;

  std::uint64_t monitor_runs = 0, resize_events = 0, splits = 0, rehash_fallbacks = 0, merges = 0, blocked_ns = 0,
                stall_ns = 0, forced_resizes = 0;
  std::array<std::uint64_t, kOpKinds> ops{};
  std::uint64_t exec_ns = 0, commit_ns = 0, abort_ns = 0, backoff_ns = 0;

  std::uint64_t checked = 0, serializable = 0, hygiene_clean = 0, locks_clean = 0, invariants_clean = 0;
  std::string check_detail;

  bool operator==(const RunReport&) const = default;

  // Calls f(name, member) for every field; names are dotted paths.
  template <typename Self, typename F>
  static void fields(Self& r, F&& f);
};

std::string to_json(const RunReport& r);
RunReport report_from_json(std::string_view text);
std::string to_csv(const RunReport& r);
RunReport report_from_csv(std::string_view text);

// ---------------------------------------------------------------------------
// Benchmark runs

class Bench {
 public:
  explicit Bench(const RunConfig& cfg);
  ~Bench();
  Bench(const Bench&) = delete;
  Bench& operator=(const Bench&) = delete;

  // Loads the database, runs every worker to completion and builds the report.
  RunReport run();

  const RunConfig& config() const { return cfg_; }
  Fabric& fabric() { return *fabric_; }
  Database& db() { return *db_; }
  const Histogram& latencies() const { return latency_; }

 private:
  Task<void> worker(std::size_t slot, std::uint64_t gid, std::uint64_t quota);
  Txn next_txn(std::uint64_t gid);
  RunReport build_report() const;

  RunConfig cfg_;
  std::unique_ptr<Fabric> fabric_;
  std::unique_ptr<Database> db_;
  Scheduler sched_;
  std::vector<std::unique_ptr<MemPort>> ports_;
  std::vector<YcsbGenerator> ycsb_;
  std::vector<TpccGenerator> tpcc_;
  std::vector<Rng> backoff_rng_;
  Histogram latency_;
  bool ran_ = false;
};

RunReport run_bench(const RunConfig& cfg);

struct SpeedupPoint {
  std::uint32_t record_size = 0;
  double ctxnl_tps = 0;
  double vanilla_tps = 0;
  double speedup = 0;
};

// Runs `base` in both modes for each record size.
std::vector<SpeedupPoint> record_size_sweep(const RunConfig& base, const std::vector<std::uint32_t>& sizes);

// Side-by-side metric table; ratio columns are relative to the first report.
std::string compare_reports(const std::vector<std::pair<std::string, RunReport>>& reports);

// ---------------------------------------------------------------------------
// Litmus conformance

using LitmusOutcome = std::array<std::uint64_t, 4>;  // r1, r2, r3, r4

struct LitmusCase {
  std::string program;
  Mode mode = Mode::Ctxnl;
  std::set<LitmusOutcome> reachable;
  std::uint64_t interleavings = 0;
  std::uint64_t runs = 0;
  std::string expectation;
  bool pass = true;
  std::string witness;  // offending schedule on failure
};

struct LitmusReport {
  std::vector<LitmusCase> cases;
  bool pass() const;
  std::string to_text() const;
};

// Enumerates every interleaving of the three two-node programs under both
// modes; with `evictions`, also every choice of evicting the issuing node's
// cache after each op.
LitmusReport run_litmus(bool evictions = true);

// ---------------------------------------------------------------------------
// VAT retry sweep: random 64-byte L-St requests from one node until the
// first insertion needs a resize.

struct SweepConfig {
  std::uint32_t tables = 1;
  std::uint64_t entries_per_table = 512 * 1024;
  std::uint32_t max_retries = 64;
  CacheConfig cache;
  std::uint64_t window_bytes = 1 << 20;
  std::uint64_t seed = 1;
};

struct SweepRow {
  std::uint64_t pending_bytes = 0;  // at the window's end
  double occupancy = 0;
  std::uint64_t inserts = 0;
  std::uint64_t retries_p50 = 0;
  std::uint64_t retries_p99 = 0;
  std::uint64_t retries_max = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::uint64_t capacity_bytes = 0;      // pending writes when the first insertion failed
  double occupancy_at_failure = 0;
  std::uint64_t p99_capacity_bytes = 0;  // end of the last window with p99 retries <= 6
  Histogram retries_below_threshold;     // insertions at occupancy <= 0.6
  std::uint64_t inserts = 0;

  std::string to_csv() const;
};

SweepResult run_vat_sweep(const SweepConfig& cfg);

// ---------------------------------------------------------------------------

template <typename Self, typename F>
void RunReport::fields(Self& r, F&& f) {
  f("schema", r.schema);
  f("config.mode", r.mode);
  f("config.algorithm", r.algorithm);
  f("config.workload", r.workload);
  f("config.profile", r.profile);
  f("config.nodes", r.nodes);
  f("config.workers", r.workers);
  f("config.txns", r.txns);
  f("config.seed", r.seed);
  f("config.record_size", r.record_size);
  f("txn.commits", r.commits);
  f("txn.aborts.validation_conflict", r.aborts_validation);
  f("txn.aborts.lock_conflict", r.aborts_lock);
  f("txn.aborts.wait_die_kill", r.aborts_wait_die);
  f("txn.abort_rate", r.abort_rate);
  f("txn.span_ns", r.span_ns);
  f("txn.throughput_tps", r.throughput_tps);
  f("txn.latency.p50_ns", r.latency_p50_ns);
  f("txn.latency.p99_ns", r.latency_p99_ns);
  f("txn.latency.max_ns", r.latency_max_ns);
  f("txn.latency.mean_ns", r.latency_mean_ns);
  f("txn.phase.exec_ns", r.exec_ns);
  f("txn.phase.commit_ns", r.commit_ns);
  f("txn.phase.abort_ns", r.abort_ns);
  f("txn.phase.backoff_ns", r.backoff_ns);
  auto traffic = [&](const char* prefix, auto& t) {
    std::string p = prefix;
    f(p + ".loads", t.loads);
    f(p + ".stores", t.stores);
    f(p + ".rmws", t.rmws);
    f(p + ".misses", t.misses);
    f(p + ".remote_signals", t.remote_signals);
    f(p + ".bi_invalidations", t.bi_invalidations);
    f(p + ".sf_evictions", t.sf_evictions);
    f(p + ".ownership_transfers", t.ownership_transfers);
  };
  traffic("traffic.record", r.record);
  traffic("traffic.meta", r.meta);
  f("traffic.record_coherence_events", r.record_coherence_events);
  f("traffic.record_coherence_events_vanilla", r.record_coherence_events_vanilla);
  f("sync.gsync", r.gsync);
  f("sync.wd", r.wd);
  f("sync.batches", r.sync_batches);
  f("sync.peer_bi_sent", r.peer_bi_sent);
  f("sync.peer_invalidations", r.peer_invalidations);
  f("sync.self_bi", r.self_bi);
  f("sync.bus_bytes", r.bus_bytes);
  f("sync.merge_on_chip", r.merge_on_chip);
  f("sync.merge_vms", r.merge_vms);
  f("sync.merge_none", r.merge_none);
  f("sync.backpressure_events", r.backpressure_events);
  f("breakdown.dram_ns", r.dram_ns);
  f("breakdown.remote_signal_ns", r.remote_signal_ns);
  f("breakdown.sf_bi_ns", r.sf_bi_ns);
  f("breakdown.ep_logic_ns", r.ep_logic_ns);
  f("breakdown.total_ns", r.gfam_total_ns);
  f("vms.translate_loads", r.translate_loads);
  f("vms.vf_negative", r.vf_negative);
  f("vms.vf_false_positive", r.vf_false_positive);
  f("vms.vf_sift_rate", r.vf_sift_rate);
  f("vms.hits", r.vms_hits);
  f("vms.overflow_count", r.vms_overflow_count);
  f("vms.vat_updates", r.vat_updates);
  f("vms.vat_invalidations", r.vat_invalidations);
  f("vms.vat_retries_p99", r.vat_retries_p99);
  f("vms.vf_rebuilds", r.vf_rebuilds);
  f("vms.vbf_inserts", r.vbf_inserts);
  f("vms.vbf_removes", r.vbf_removes);
  f("vms.resize_required", r.resize_required);
  f("runtime.monitor_runs", r.monitor_runs);
  f("runtime.resize_events", r.resize_events);
  f("runtime.splits", r.splits);
  f("runtime.rehash_fallbacks", r.rehash_fallbacks);
  f("runtime.merges", r.merges);
  f("runtime.blocked_ns", r.blocked_ns);
  f("runtime.stall_ns", r.stall_ns);
  f("runtime.forced_resizes", r.forced_resizes);
  for (std::size_t k = 0; k < kOpKinds; ++k)
    f(std::string("ops.") + to_string(static_cast<OpKind>(k)), r.ops[k]);
  f("checks.ran", r.checked);
  f("checks.serializable", r.serializable);
  f("checks.abort_hygiene", r.hygiene_clean);
  f("checks.lock_words", r.locks_clean);
  f("checks.invariants", r.invariants_clean);
  f("checks.detail", r.check_detail);
}

}  // namespace gfam
