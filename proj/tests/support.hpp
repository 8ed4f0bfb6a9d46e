#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "gfam/harness.hpp"

namespace gfam::fixtures {

// Small fabric for unit tests: tiny caches and LUT so construction is cheap.
inline FabricConfig small_fabric(std::uint32_t nodes = 2) {
  FabricConfig f;
  f.nodes = nodes;
  f.cache.capacity_bytes = 64 * 64;
  f.cache.associativity = 4;
  f.sf.entries = 1024;
  f.sf.ways = 16;
  f.shim.vat.entries_per_table = 4096;
  f.shim.vat.lut_bits = 4;
  f.capacity = 16 << 20;
  f.chunk_bytes = 4096;
  return f;
}

inline RunConfig small_run(std::uint32_t nodes = 2, std::uint32_t workers = 2) {
  RunConfig c;
  c.nodes = nodes;
  c.workers_per_node = workers;
  c.ycsb.records = 2000;
  c.txns = 400;
  c.cache.capacity_bytes = 64 * 1024;
  c.shim.vat.entries_per_table = 16 * 1024;
  c.shim.vat.lut_bits = 4;
  c.capacity = 64 << 20;
  return c;
}

// Zero-latency single-worker configuration for the sequential oracle.
inline RunConfig zero_latency(RunConfig c) {
  c.nodes = 1;
  c.workers_per_node = 1;
  c.profile = "custom";
  c.custom = CustomProfileParams{};
  c.cpu_op_ns = 0;
  c.backoff_ns = 0;
  return c;
}

// Independent re-derivation of the record format: stamp, key, then a
// splitmix stream seeded by stamp xor FNV-1a of the prior bytes.
inline std::uint64_t oracle_mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::vector<std::uint8_t> oracle_record(std::uint64_t stamp, std::uint64_t key,
                                               const std::vector<std::uint8_t>& prior) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : prior) h = (h ^ b) * 0x100000001b3ULL;
  const std::uint64_t s = stamp ^ h;
  std::vector<std::uint8_t> out(prior.size());
  auto put = [&](std::size_t at, std::uint64_t w) {
    for (int i = 0; i < 8; ++i) out[at + i] = static_cast<std::uint8_t>(w >> (8 * i));
  };
  std::size_t i = 0;
  for (; i + 8 <= out.size(); i += 8) put(i, i == 0 ? stamp : i == 8 ? key : oracle_mix(s + i));
  for (; i < out.size(); ++i) out[i] = static_cast<std::uint8_t>(oracle_mix(s + i));
  return out;
}

// Applies the transactions one after another to a plain map.
inline std::map<std::uint64_t, std::vector<std::uint8_t>> sequential_image(const std::vector<Txn>& txns,
                                                                           std::size_t payload_bytes) {
  std::map<std::uint64_t, std::vector<std::uint8_t>> img;
  std::uint64_t seq = 0;
  for (const Txn& t : txns) {
    const std::uint64_t stamp = ++seq;  // worker 0
    std::vector<std::uint64_t> order;
    std::set<std::uint64_t> written, seen;
    for (const TxnOp& op : t.ops) {
      if (seen.insert(op.key).second) order.push_back(op.key);
      if (op.write) written.insert(op.key);
    }
    for (std::uint64_t k : order) {
      if (!written.count(k)) continue;
      auto it = img.find(k);
      std::vector<std::uint8_t> prior = it == img.end() ? std::vector<std::uint8_t>(payload_bytes, 0) : it->second;
      img[k] = oracle_record(stamp, k, prior);
    }
  }
  return img;
}

// The transactions a single-worker run of `cfg` executes, in order.
inline std::vector<Txn> single_worker_txns(const RunConfig& cfg) {
  std::vector<Txn> out;
  if (cfg.workload == WorkloadKind::Ycsb) {
    YcsbGenerator g(cfg.ycsb, cfg.seed, 0);
    for (std::uint64_t i = 0; i < cfg.txns; ++i) out.push_back(g.next());
  } else {
    TpccGenerator g(cfg.tpcc_params(), 0, cfg.seed, 0);
    for (std::uint64_t i = 0; i < cfg.txns; ++i) out.push_back(g.next());
  }
  return out;
}

// Empty when every key the oracle wrote reads back identically from node 0
// and from the committed image; otherwise the first mismatching key.
inline std::string golden_mismatch(const RunConfig& cfg) {
  Bench bench(cfg);
  bench.run();
  const Database& db = bench.db();
  auto img = sequential_image(single_worker_txns(cfg), db.payload_bytes());
  const auto& committed = db.committed_image();
  if (committed.size() != img.size())
    return "committed image has " + std::to_string(committed.size()) + " keys, oracle " +
           std::to_string(img.size());
  for (const auto& [k, bytes] : img) {
    if (db.view_payload(0, k) != bytes) return "fabric bytes differ for key " + std::to_string(k);
    auto it = committed.find(k);
    if (it == committed.end() || it->second != bytes) return "committed image differs for key " + std::to_string(k);
  }
  return {};
}

}  // namespace gfam::fixtures
