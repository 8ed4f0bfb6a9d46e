#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gfam/fabric.hpp"
#include "gfam/memport.hpp"
#include "gfam/stats.hpp"
#include "gfam/task.hpp"

namespace gfam {

enum class Mode : std::uint8_t { Ctxnl, Vanilla };
enum class CcAlgorithm : std::uint8_t { Silo, Occ, NoWait, WaitDie };
enum class AbortReason : std::uint8_t { ValidationConflict = 0, LockConflict = 1, WaitDieKill = 2 };
inline constexpr std::size_t kAbortReasons = 3;

const char* to_string(Mode m);
const char* to_string(CcAlgorithm a);
const char* to_string(AbortReason r);
Mode parse_mode(const std::string& s);            // throws ConfigError
CcAlgorithm parse_algorithm(const std::string& s);  // throws ConfigError

struct TxnOp {
  std::uint64_t key = 0;
  bool write = false;
};

struct Txn {
  std::vector<TxnOp> ops;
  std::uint8_t kind = 0;  // workload-defined label
};

// Record bytes: [stamp u64][key u64][pattern seeded by stamp and the prior bytes].
void make_record(std::span<std::uint8_t> out, std::uint64_t stamp, std::uint64_t key,
                 std::span<const std::uint8_t> prior);
std::uint64_t record_stamp(std::span<const std::uint8_t> bytes);
std::uint64_t digest(std::span<const std::uint8_t> bytes);

struct DbConfig {
  Mode mode = Mode::Ctxnl;
  CcAlgorithm algorithm = CcAlgorithm::Silo;
  std::uint32_t record_size = 200;
  std::uint64_t buckets = 0;  // 0: next power of two >= record count
  SimTime cpu_op_ns = 50;
  SimTime spin_ns = 50;
  SimTime backoff_ns = 1000;
  bool record_history = true;

  void validate() const;
};

struct ReadRecord {
  std::uint64_t key;
  std::uint64_t version;
  std::uint64_t stamp;
};

struct WriteRecord {
  std::uint64_t key;
  std::uint64_t version;  // version installed by this write
  std::uint64_t stamp;
};

struct CommittedTxn {
  std::uint64_t id = 0;
  std::uint64_t worker = 0;
  SimTime commit_time = 0;
  std::vector<ReadRecord> reads;
  std::vector<WriteRecord> writes;
};

struct TxnResult {
  bool committed = false;
  std::uint32_t attempts = 0;
  std::array<std::uint32_t, kAbortReasons> aborts{};
  SimTime latency_ns = 0;
};

struct DbStats {
  std::uint64_t commits = 0;
  std::array<std::uint64_t, kAbortReasons> aborts{};
  std::uint64_t gsync_calls = 0;
  std::uint64_t wd_calls = 0;
  std::uint64_t lines_installed = 0;
  SimTime exec_ns = 0;
  SimTime commit_ns = 0;
  SimTime abort_ns = 0;
  SimTime backoff_ns = 0;

  std::uint64_t total_aborts() const { return aborts[0] + aborts[1] + aborts[2]; }
};

struct Tuple {
  Addr header = 0;
  Addr payload = 0;
};

// Hash-indexed store: index and tuple headers on the vanilla segment,
// payloads on the ctxnl segment (or the vanilla segment in vanilla mode).
class Database {
 public:
  // Header line layout.
  static constexpr std::uint64_t kLockOff = 0;
  static constexpr std::uint64_t kVersionOff = 8;
  static constexpr std::uint64_t kKeyOff = 16;
  static constexpr std::uint64_t kPayloadOff = 24;
  static constexpr std::uint64_t kVersionLock = std::uint64_t{1} << 63;

  Database(Fabric& fabric, const DbConfig& cfg);

  const DbConfig& config() const { return cfg_; }
  std::uint32_t payload_lines() const { return lines_; }
  std::uint32_t payload_bytes() const { return lines_ * static_cast<std::uint32_t>(kLineSize); }

  // Writes the index, headers and zeroed payloads straight to fabric DRAM.
  // Record i lives on node placement[i], or on node i % nodes without a placement.
  void load(std::span<const std::uint64_t> keys, std::span<const NodeId> placement = {});
  void load_range(std::uint64_t count);
  std::size_t size() const { return tuples_.size(); }
  const Tuple& tuple(std::uint64_t key) const;

  // Runs the transaction to commit, retrying after each abort.
  Task<TxnResult> execute(MemPort& port, const Txn& txn, std::uint64_t worker, Rng& rng);

  const std::vector<CommittedTxn>& history() const { return history_; }
  const DbStats& stats() const { return stats_; }

  // Last committed payload per key that any transaction wrote.
  const std::unordered_map<std::uint64_t, std::vector<std::uint8_t>>& committed_image() const {
    return committed_;
  }
  // Every node must read each touched key's last committed bytes. Quiescent only.
  std::string abort_hygiene_scan() const;
  // Lock words zero and version words unlocked. Quiescent only.
  std::string lock_scan() const;
  // Payload bytes a node would read for `key`, without side effects.
  std::vector<std::uint8_t> view_payload(NodeId node, std::uint64_t key) const;

 private:
  struct Access;
  struct Attempt;

  std::uint64_t bucket_of(std::uint64_t key) const;
  Task<void> locate(MemPort& port, Access& a);
  Task<void> read_payload(MemPort& port, Access& a);
  Task<void> write_payload(MemPort& port, const Access& a, std::span<const std::uint8_t> bytes);
  Task<bool> run_optimistic(MemPort& port, Attempt& at);
  Task<bool> run_locking(MemPort& port, Attempt& at);
  Task<bool> acquire(MemPort& port, Attempt& at, Access& a);
  Task<void> release(MemPort& port, Access& a);
  void record_commit(Attempt& at, SimTime when);

  Fabric& fabric_;
  DbConfig cfg_;
  std::uint32_t lines_;
  std::uint64_t buckets_ = 0;
  Addr bucket_base_ = 0;
  std::unordered_map<std::uint64_t, Tuple> tuples_;
  std::vector<CommittedTxn> history_;
  std::unordered_map<std::uint64_t, std::vector<std::uint8_t>> committed_;
  std::set<std::uint64_t> touched_;
  std::map<std::uint64_t, std::uint64_t> stamp_seq_;  // per worker
  std::uint64_t next_ts_ = 1;
  std::uint64_t next_txn_id_ = 1;
  DbStats stats_;
};

// ---------------------------------------------------------------------------
// Serializability over committed histories

struct SerializabilityResult {
  bool ok = true;
  std::string reason;
  std::vector<std::uint64_t> cycle;  // transaction ids, first repeated implicitly
  std::uint64_t edges = 0;
};

// Builds the direct serialization graph from version order (ww), reads-from
// (wr) and anti-dependencies (rw); passes iff it is acyclic and every read
// observed the stamp its version's writer installed.
SerializabilityResult check_serializable(const std::vector<CommittedTxn>& history);

}  // namespace gfam
