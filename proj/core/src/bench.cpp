#include <cstdio>
#include <sstream>

#include "gfam/error.hpp"
#include "gfam/harness.hpp"

namespace gfam {

Bench::Bench(const RunConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  fabric_ = std::make_unique<Fabric>(cfg_.fabric_config());
  db_ = std::make_unique<Database>(*fabric_, cfg_.db_config());
}

Bench::~Bench() = default;

Txn Bench::next_txn(std::uint64_t gid) {
  return cfg_.workload == WorkloadKind::Ycsb ? ycsb_[gid].next() : tpcc_[gid].next();
}

Task<void> Bench::worker(std::size_t slot, std::uint64_t gid, std::uint64_t quota) {
  MemPort& port = *ports_[slot];
  for (std::uint64_t i = 0; i < quota; ++i) {
    Txn t = next_txn(gid);
    TxnResult r = co_await db_->execute(port, t, gid, backoff_rng_[gid]);
    latency_.add(r.latency_ns);
  }
}

RunReport Bench::run() {
  if (ran_) throw ConfigError("Bench::run: already ran");
  ran_ = true;
  if (cfg_.workload == WorkloadKind::Ycsb) {
    db_->load_range(cfg_.ycsb.records);
  } else {
    TpccKeys keys = tpcc_keys(cfg_.tpcc_params());
    db_->load(keys.keys, keys.placement);
  }

  const std::uint64_t total = std::uint64_t{cfg_.nodes} * cfg_.workers_per_node;
  for (NodeId n = 0; n < cfg_.nodes; ++n)
    for (std::uint32_t w = 0; w < cfg_.workers_per_node; ++w) {
      std::size_t slot = sched_.add_worker({n, w});
      std::uint64_t gid = std::uint64_t{n} * cfg_.workers_per_node + w;
      ports_.push_back(std::make_unique<MemPort>(*fabric_, sched_, slot));
      backoff_rng_.emplace_back(cfg_.seed ^ 0xb0ffULL, gid);
      if (cfg_.workload == WorkloadKind::Ycsb)
        ycsb_.emplace_back(cfg_.ycsb, cfg_.seed, gid);
      else
        tpcc_.emplace_back(cfg_.tpcc_params(), n, cfg_.seed, gid);
    }
  for (std::size_t slot = 0; slot < total; ++slot) {
    std::uint64_t quota = cfg_.txns / total + (slot < cfg_.txns % total ? 1 : 0);
    sched_.spawn(slot, worker(slot, slot, quota));
  }
  sched_.set_step_hook([this](SimTime now) { fabric_->tick(now); });
  sched_.run();
  return build_report();
}

RunReport Bench::build_report() const {
  RunReport r;
  r.mode = to_string(cfg_.mode);
  r.algorithm = to_string(cfg_.algorithm);
  r.workload = cfg_.workload == WorkloadKind::Ycsb ? "ycsb" : "tpcc";
  r.profile = cfg_.latency_profile().name;
  r.nodes = cfg_.nodes;
  r.workers = std::uint64_t{cfg_.nodes} * cfg_.workers_per_node;
  r.txns = cfg_.txns;
  r.seed = cfg_.seed;
  r.record_size = cfg_.ycsb.record_size;

  const DbStats& ds = db_->stats();
  r.commits = ds.commits;
  r.aborts_validation = ds.aborts[0];
  r.aborts_lock = ds.aborts[1];
  r.aborts_wait_die = ds.aborts[2];
  std::uint64_t attempts = ds.commits + ds.total_aborts();
  r.abort_rate = attempts ? static_cast<double>(ds.total_aborts()) / static_cast<double>(attempts) : 0.0;
  r.span_ns = sched_.clock().max_time();
  r.throughput_tps = r.span_ns ? static_cast<double>(r.commits) * 1e9 / static_cast<double>(r.span_ns) : 0.0;
  r.latency_p50_ns = latency_.percentile(50);
  r.latency_p99_ns = latency_.percentile(99);
  r.latency_max_ns = latency_.max();
  r.latency_mean_ns = latency_.mean();
  r.exec_ns = ds.exec_ns;
  r.commit_ns = ds.commit_ns;
  r.abort_ns = ds.abort_ns;
  r.backoff_ns = ds.backoff_ns;

  const VanillaStats& vs = fabric_->vanilla().stats();
  r.record = vs.record();
  r.meta = vs.meta();
  const SyncStats& ss = fabric_->sync().stats();
  r.gsync = ss.gsync_count;
  r.wd = ss.wd_count;
  r.sync_batches = ss.batches;
  r.peer_bi_sent = ss.peer_bi_sent;
  r.peer_invalidations = ss.peer_invalidations;
  r.self_bi = ss.self_bi;
  r.bus_bytes = ss.bus_bytes;
  r.merge_on_chip = ss.merge_on_chip;
  r.merge_vms = ss.merge_vms;
  r.merge_none = ss.merge_none;
  r.backpressure_events = ss.backpressure_events;
  r.record_coherence_events_vanilla = r.record.remote_signals + r.record.bi_invalidations;
  r.record_coherence_events = r.record_coherence_events_vanilla + ss.peer_bi_sent;

  const FabricStats& fs = fabric_->stats();
  Breakdown b = fs.total();
  r.dram_ns = b.dram;
  r.remote_signal_ns = b.remote_signal;
  r.sf_bi_ns = b.sf_bi;
  r.ep_logic_ns = b.ep_logic;
  r.gfam_total_ns = b.total();
  r.ops = fs.ops;
  r.stall_ns = fs.stall_ns;
  r.forced_resizes = fs.forced_resizes;

  const ViewShimStats& vm = fabric_->shim().stats();
  r.translate_loads = vm.translate_loads;
  r.vf_negative = vm.vf_negative;
  r.vf_false_positive = vm.vf_false_positive;
  r.vf_sift_rate = vm.vf_sift_rate();
  r.vms_hits = vm.vms_hits;
  r.vms_overflow_count = vm.vms_overflow_count;
  r.vat_updates = vm.vat_updates;
  r.vat_invalidations = vm.vat_invalidations;
  r.vat_retries_p99 = vm.vat_retries.percentile(99);
  r.vf_rebuilds = vm.vf_rebuilds;
  r.vbf_inserts = vm.vbf_inserts;
  r.vbf_removes = vm.vbf_removes;
  r.resize_required = vm.resize_required;

  const RuntimeStats& rs = fabric_->monitor().stats();
  r.monitor_runs = rs.monitor_runs;
  r.resize_events = rs.resize_events;
  r.splits = rs.splits;
  r.rehash_fallbacks = rs.rehash_fallbacks;
  r.merges = rs.merges;
  r.blocked_ns = rs.blocked_ns;

  if (cfg_.check) {
    r.checked = 1;
    std::string detail;
    if (cfg_.history) {
      SerializabilityResult s = check_serializable(db_->history());
      r.serializable = s.ok;
      if (!s.ok) detail += "serializability: " + s.reason + "\n";
    }
    std::string hygiene = db_->abort_hygiene_scan();
    std::string locks = db_->lock_scan();
    std::string inv = fabric_->check_invariants();
    r.hygiene_clean = hygiene.empty();
    r.locks_clean = locks.empty();
    r.invariants_clean = inv.empty();
    detail += hygiene + locks + inv;
    if (detail.size() > 2000) detail.resize(2000);
    r.check_detail = detail;
  }
  return r;
}

RunReport run_bench(const RunConfig& cfg) {
  Bench b(cfg);
  return b.run();
}

std::vector<SpeedupPoint> record_size_sweep(const RunConfig& base, const std::vector<std::uint32_t>& sizes) {
  std::vector<SpeedupPoint> out;
  for (std::uint32_t s : sizes) {
    RunConfig c = base;
    c.ycsb.record_size = s;
    c.mode = Mode::Ctxnl;
    RunReport x = run_bench(c);
    c.mode = Mode::Vanilla;
    RunReport v = run_bench(c);
    SpeedupPoint p{s, x.throughput_tps, v.throughput_tps, 0};
    p.speedup = v.throughput_tps > 0 ? x.throughput_tps / v.throughput_tps : 0;
    out.push_back(p);
  }
  return out;
}

std::string compare_reports(const std::vector<std::pair<std::string, RunReport>>& reports) {
  if (reports.empty()) return {};
  struct Metric {
    const char* name;
    double (*get)(const RunReport&);
  };
  static const Metric metrics[] = {
      {"throughput_tps", [](const RunReport& r) { return r.throughput_tps; }},
      {"abort_rate", [](const RunReport& r) { return r.abort_rate; }},
      {"latency_p50_ns", [](const RunReport& r) { return double(r.latency_p50_ns); }},
      {"latency_p99_ns", [](const RunReport& r) { return double(r.latency_p99_ns); }},
      {"record_coherence_events", [](const RunReport& r) { return double(r.record_coherence_events); }},
      {"remote_signals", [](const RunReport& r) { return double(r.record.remote_signals + r.meta.remote_signals); }},
      {"bi_invalidations",
       [](const RunReport& r) { return double(r.record.bi_invalidations + r.meta.bi_invalidations); }},
      {"sf_evictions", [](const RunReport& r) { return double(r.record.sf_evictions + r.meta.sf_evictions); }},
      {"gsync", [](const RunReport& r) { return double(r.gsync); }},
      {"bus_bytes", [](const RunReport& r) { return double(r.bus_bytes); }},
      {"dram_ns", [](const RunReport& r) { return double(r.dram_ns); }},
      {"remote_signal_ns", [](const RunReport& r) { return double(r.remote_signal_ns); }},
      {"sf_bi_ns", [](const RunReport& r) { return double(r.sf_bi_ns); }},
      {"ep_logic_ns", [](const RunReport& r) { return double(r.ep_logic_ns); }},
  };
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-26s", "metric");
  out << buf;
  for (const auto& [label, r] : reports) {
    std::snprintf(buf, sizeof buf, " %18s", label.c_str());
    out << buf;
  }
  for (std::size_t i = 1; i < reports.size(); ++i) {
    std::snprintf(buf, sizeof buf, " %12s", ("ratio" + std::to_string(i)).c_str());
    out << buf;
  }
  out << "\n";
  for (const Metric& m : metrics) {
    std::snprintf(buf, sizeof buf, "%-26s", m.name);
    out << buf;
    double base = m.get(reports[0].second);
    for (const auto& [label, r] : reports) {
      std::snprintf(buf, sizeof buf, " %18.6g", m.get(r));
      out << buf;
    }
    for (std::size_t i = 1; i < reports.size(); ++i) {
      double v = m.get(reports[i].second);
      if (base != 0)
        std::snprintf(buf, sizeof buf, " %12.4f", v / base);
      else
        std::snprintf(buf, sizeof buf, " %12s", "-");
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace gfam
