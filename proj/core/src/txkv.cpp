#include "gfam/txkv.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <deque>
#include <sstream>

#include "gfam/error.hpp"

namespace gfam {

const char* to_string(Mode m) { return m == Mode::Ctxnl ? "ctxnl" : "vanilla"; }

const char* to_string(CcAlgorithm a) {
  switch (a) {
    case CcAlgorithm::Silo: return "SILO";
    case CcAlgorithm::Occ: return "OCC";
    case CcAlgorithm::NoWait: return "NO_WAIT";
    case CcAlgorithm::WaitDie: return "WAIT_DIE";
  }
  return "?";
}

const char* to_string(AbortReason r) {
  switch (r) {
    case AbortReason::ValidationConflict: return "validation-conflict";
    case AbortReason::LockConflict: return "lock-conflict";
    case AbortReason::WaitDieKill: return "wait-die-kill";
  }
  return "?";
}

Mode parse_mode(const std::string& s) {
  if (s == "ctxnl") return Mode::Ctxnl;
  if (s == "vanilla") return Mode::Vanilla;
  throw ConfigError("mode: expected ctxnl or vanilla, got '" + s + "'");
}

CcAlgorithm parse_algorithm(const std::string& s) {
  std::string u;
  for (char c : s) u.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (u == "SILO") return CcAlgorithm::Silo;
  if (u == "OCC") return CcAlgorithm::Occ;
  if (u == "NO_WAIT") return CcAlgorithm::NoWait;
  if (u == "WAIT_DIE") return CcAlgorithm::WaitDie;
  throw ConfigError("txn.algorithm: expected SILO, OCC, NO_WAIT or WAIT_DIE, got '" + s + "'");
}

std::uint64_t digest(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void make_record(std::span<std::uint8_t> out, std::uint64_t stamp, std::uint64_t key,
                 std::span<const std::uint8_t> prior) {
  std::uint64_t s = stamp ^ digest(prior);
  std::size_t i = 0;
  for (; i + 8 <= out.size(); i += 8) {
    std::uint64_t w;
    if (i == 0)
      w = stamp;
    else if (i == 8)
      w = key;
    else
      w = splitmix64(s + i);
    store_u64(out.data() + i, w);
  }
  for (; i < out.size(); ++i) out[i] = static_cast<std::uint8_t>(splitmix64(s + i));
}

std::uint64_t record_stamp(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 8 ? load_u64(bytes.data()) : 0;
}

void DbConfig::validate() const {
  if (record_size == 0) throw ConfigError("ycsb.record_size: must be > 0");
  if (record_size > 64 * 1024) throw ConfigError("ycsb.record_size: must be <= 65536");
  if (buckets != 0 && !std::has_single_bit(buckets)) throw ConfigError("txn.buckets: must be a power of two");
}

namespace {

// 2PL lock word: exclusive bit, shared-holder count, smallest holder timestamp.
constexpr std::uint64_t kExclusive = std::uint64_t{1} << 63;
constexpr int kCountShift = 48;
constexpr std::uint64_t kCountMask = 0x7fff;
constexpr std::uint64_t kTsMask = (std::uint64_t{1} << kCountShift) - 1;

std::uint64_t holders(std::uint64_t w) { return (w >> kCountShift) & kCountMask; }

}  // namespace

struct Database::Access {
  std::uint64_t key = 0;
  bool write = false;
  Addr header = 0;
  Addr payload = 0;
  std::uint64_t version = 0;  // observed, unlocked
  std::vector<std::uint8_t> data;
  std::vector<std::uint8_t> next;    // bytes this transaction writes
  std::vector<std::uint8_t> before;  // vanilla in-place undo image
  std::uint64_t locked_over = 0;  // version word replaced by the lock bit
  bool locked = false;
  bool exclusive = false;
  bool written = false;
};

struct Database::Attempt {
  std::uint64_t worker = 0;
  std::uint64_t ts = 0;
  std::uint64_t stamp = 0;
  std::vector<Access> acc;
  AbortReason reason = AbortReason::ValidationConflict;
  SimTime commit_start = 0;
};

Database::Database(Fabric& fabric, const DbConfig& cfg) : fabric_(fabric), cfg_(cfg) {
  cfg_.validate();
  lines_ = static_cast<std::uint32_t>((cfg_.record_size + kLineSize - 1) / kLineSize);
}

std::uint64_t Database::bucket_of(std::uint64_t key) const { return splitmix64(key) & (buckets_ - 1); }

void Database::load_range(std::uint64_t count) {
  std::vector<std::uint64_t> keys(count);
  for (std::uint64_t i = 0; i < count; ++i) keys[i] = i;
  load(keys);
}

void Database::load(std::span<const std::uint64_t> keys, std::span<const NodeId> placement) {
  if (!tuples_.empty()) throw ConfigError("database already loaded");
  if (keys.empty()) throw ConfigError("ycsb.records: must be > 0");
  if (!placement.empty() && placement.size() != keys.size())
    throw ConfigError("load: placement must cover every key");
  const std::uint32_t nodes = fabric_.nodes();
  buckets_ = cfg_.buckets ? cfg_.buckets : std::bit_ceil<std::uint64_t>(keys.size());
  bucket_base_ = fabric_.cxl_alloc(0, buckets_ * 8, Primitive::Vanilla, TrafficClass::Meta);

  std::vector<std::uint64_t> per_node(nodes, 0);
  auto home = [&](std::size_t i) -> NodeId {
    if (placement.empty()) return static_cast<NodeId>(i % nodes);
    if (placement[i] >= nodes) throw ConfigError("load: placement names an unknown node");
    return placement[i];
  };
  for (std::size_t i = 0; i < keys.size(); ++i) ++per_node[home(i)];
  struct Blocks {
    Addr headers = 0, chain = 0, payloads = 0;
  };
  std::vector<Blocks> blocks(nodes);
  const Primitive pp = cfg_.mode == Mode::Ctxnl ? Primitive::Ctxnl : Primitive::Vanilla;
  for (NodeId n = 0; n < nodes; ++n) {
    if (per_node[n] == 0) continue;
    blocks[n].headers = fabric_.cxl_alloc(n, per_node[n] * kLineSize, Primitive::Vanilla, TrafficClass::Meta);
    blocks[n].chain = fabric_.cxl_alloc(n, per_node[n] * 32, Primitive::Vanilla, TrafficClass::Meta);
    blocks[n].payloads = fabric_.cxl_alloc(n, per_node[n] * payload_bytes(), pp, TrafficClass::Record);
  }

  std::vector<Addr> heads(buckets_, 0);
  std::vector<std::uint64_t> slot(nodes, 0);
  std::array<std::uint8_t, 32> header{};
  std::array<std::uint8_t, 32> chain{};
  tuples_.reserve(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    std::uint64_t key = keys[i];
    NodeId n = home(i);
    std::uint64_t s = slot[n]++;
    Tuple t{blocks[n].headers + s * kLineSize, blocks[n].payloads + s * payload_bytes()};
    if (!tuples_.emplace(key, t).second) throw ConfigError("duplicate key " + std::to_string(key));
    header.fill(0);
    store_u64(header.data() + kKeyOff, key);
    store_u64(header.data() + kPayloadOff, t.payload);
    fabric_.poke(t.header, header);

    Addr node_addr = blocks[n].chain + s * 32;
    std::uint64_t b = bucket_of(key);
    store_u64(chain.data(), key);
    store_u64(chain.data() + 8, t.header);
    store_u64(chain.data() + 16, heads[b]);
    fabric_.poke(node_addr, chain);
    heads[b] = node_addr;
  }
  std::vector<std::uint8_t> raw(buckets_ * 8);
  for (std::uint64_t b = 0; b < buckets_; ++b) store_u64(raw.data() + b * 8, heads[b]);
  fabric_.poke(bucket_base_, raw);
}

const Tuple& Database::tuple(std::uint64_t key) const {
  auto it = tuples_.find(key);
  if (it == tuples_.end()) throw ConfigError("unknown key " + std::to_string(key));
  return it->second;
}

Task<void> Database::locate(MemPort& port, Access& a) {
  port.compute(cfg_.cpu_op_ns);
  Addr cur = co_await port.load_u64(bucket_base_ + bucket_of(a.key) * 8);
  std::array<std::uint8_t, 24> node{};
  while (cur != 0) {
    co_await port.load(cur, node);
    if (load_u64(node.data()) == a.key) {
      a.header = load_u64(node.data() + 8);
      break;
    }
    cur = load_u64(node.data() + 16);
  }
  if (a.header == 0) throw ConfigError("key " + std::to_string(a.key) + " not in index");
  a.payload = co_await port.load_u64(a.header + kPayloadOff);
}

Task<void> Database::read_payload(MemPort& port, Access& a) {
  a.data.assign(payload_bytes(), 0);
  for (std::uint32_t i = 0; i < lines_; ++i) {
    std::span<std::uint8_t> out(a.data.data() + i * kLineSize, kLineSize);
    if (cfg_.mode == Mode::Ctxnl)
      co_await port.l_load(a.payload + i * kLineSize, out);
    else
      co_await port.load(a.payload + i * kLineSize, out);
  }
}

Task<void> Database::write_payload(MemPort& port, const Access& a, std::span<const std::uint8_t> bytes) {
  for (std::uint32_t i = 0; i < lines_; ++i) {
    std::span<const std::uint8_t> in(bytes.data() + i * kLineSize, kLineSize);
    if (cfg_.mode == Mode::Ctxnl)
      co_await port.l_store(a.payload + i * kLineSize, in);
    else
      co_await port.store(a.payload + i * kLineSize, in);
  }
  stats_.lines_installed += lines_;
}

void Database::record_commit(Attempt& at, SimTime when) {
  ++stats_.commits;
  CommittedTxn c;
  c.id = next_txn_id_++;
  c.worker = at.worker;
  c.commit_time = when;
  for (Access& a : at.acc) {
    c.reads.push_back({a.key, a.version, record_stamp(a.data)});
    if (a.write) {
      c.writes.push_back({a.key, a.version + 1, at.stamp});
      committed_[a.key] = a.next;
    }
  }
  if (cfg_.record_history) history_.push_back(std::move(c));
}

// SILO and OCC: buffered writes installed under header locks after validation.
Task<bool> Database::run_optimistic(MemPort& port, Attempt& at) {
  const bool silo = cfg_.algorithm == CcAlgorithm::Silo;
  bool doomed = false;
  for (Access& a : at.acc) {
    co_await locate(port, a);
    for (;;) {
      std::uint64_t v1 = co_await port.load_u64(a.header + kVersionOff);
      if ((v1 & kVersionLock) && silo) {
        port.compute(cfg_.spin_ns);
        continue;
      }
      co_await read_payload(port, a);
      std::uint64_t v2 = co_await port.load_u64(a.header + kVersionOff);
      if (v1 == v2 && !(v1 & kVersionLock)) {
        a.version = v1;
        break;
      }
      if (!silo) {
        a.version = v1 & ~kVersionLock;
        doomed = true;
        break;
      }
    }
    if (a.write) {
      a.next.assign(payload_bytes(), 0);
      make_record(a.next, at.stamp, a.key, a.data);
      port.compute(fabric_.config().profile.local_mem_ns * lines_);
    }
  }

  at.commit_start = port.now();
  at.reason = AbortReason::ValidationConflict;
  if (doomed) co_return false;

  std::vector<Access*> writes;
  for (Access& a : at.acc)
    if (a.write) writes.push_back(&a);
  std::sort(writes.begin(), writes.end(), [](const Access* x, const Access* y) { return x->header < y->header; });

  bool ok = true;
  for (Access* w : writes) {
    for (;;) {
      std::uint64_t v = co_await port.load_u64(w->header + kVersionOff);
      if (v & kVersionLock) {
        if (!silo) {
          ok = false;
          break;
        }
        port.compute(cfg_.spin_ns);
        continue;
      }
      RmwResult r = co_await port.cas(w->header + kVersionOff, v, v | kVersionLock);
      if (r.success) {
        w->locked = true;
        w->locked_over = v;
        if (v != w->version) ok = false;
        break;
      }
      if (!silo) {
        ok = false;
        break;
      }
    }
    if (!ok) break;
  }
  if (ok) {
    for (Access& a : at.acc) {
      if (a.write) continue;
      std::uint64_t v = co_await port.load_u64(a.header + kVersionOff);
      if (v != a.version) {
        ok = false;
        break;
      }
    }
  }
  if (!ok) {
    for (Access* w : writes)
      if (w->locked) {
        co_await port.store_u64(w->header + kVersionOff, w->locked_over);
        w->locked = false;
      }
    co_return false;
  }

  std::vector<Addr> lines;
  for (Access* w : writes) {
    co_await write_payload(port, *w, w->next);
    for (std::uint32_t i = 0; i < lines_; ++i) lines.push_back(w->payload + i * kLineSize);
  }
  if (cfg_.mode == Mode::Ctxnl && !lines.empty()) {
    co_await port.gsync(lines);
    ++stats_.gsync_calls;
  }
  for (Access* w : writes) {
    co_await port.store_u64(w->header + kVersionOff, w->version + 1);
    w->locked = false;
  }
  co_return true;
}

Task<bool> Database::acquire(MemPort& port, Attempt& at, Access& a) {
  const Addr lw = a.header + kLockOff;
  for (;;) {
    std::uint64_t w = co_await port.load_u64(lw);
    bool free = a.write ? w == 0 : !(w & kExclusive);
    if (free) {
      std::uint64_t desired;
      if (a.write) {
        desired = kExclusive | at.ts;
      } else {
        std::uint64_t ts = w & kTsMask;
        std::uint64_t mts = ts == 0 ? at.ts : std::min(ts, at.ts);
        desired = ((holders(w) + 1) << kCountShift) | mts;
      }
      RmwResult r = co_await port.cas(lw, w, desired);
      if (r.success) {
        a.locked = true;
        a.exclusive = a.write;
        co_return true;
      }
      continue;
    }
    if (cfg_.algorithm == CcAlgorithm::NoWait) {
      at.reason = AbortReason::LockConflict;
      co_return false;
    }
    // Older transactions wait for younger holders; younger requesters die.
    if (at.ts < (w & kTsMask)) {
      port.compute(cfg_.spin_ns);
      continue;
    }
    at.reason = AbortReason::WaitDieKill;
    co_return false;
  }
}

Task<void> Database::release(MemPort& port, Access& a) {
  const Addr lw = a.header + kLockOff;
  if (a.exclusive) {
    co_await port.store_u64(lw, 0);
  } else {
    for (;;) {
      std::uint64_t w = co_await port.load_u64(lw);
      std::uint64_t desired = holders(w) <= 1 ? 0 : w - (std::uint64_t{1} << kCountShift);
      RmwResult r = co_await port.cas(lw, w, desired);
      if (r.success) break;
    }
  }
  a.locked = false;
}

// NO_WAIT and WAIT_DIE: lock at first access, write payloads in place.
Task<bool> Database::run_locking(MemPort& port, Attempt& at) {
  bool ok = true;
  for (Access& a : at.acc) {
    co_await locate(port, a);
    bool got = co_await acquire(port, at, a);
    if (!got) {
      ok = false;
      break;
    }
    a.version = co_await port.load_u64(a.header + kVersionOff);
    co_await read_payload(port, a);
    if (a.write) {
      a.next.assign(payload_bytes(), 0);
      make_record(a.next, at.stamp, a.key, a.data);
      if (cfg_.mode == Mode::Vanilla) a.before = a.data;
      co_await write_payload(port, a, a.next);
      a.written = true;
    }
  }
  at.commit_start = port.now();

  std::vector<Addr> lines;
  for (Access& a : at.acc)
    if (a.written)
      for (std::uint32_t i = 0; i < lines_; ++i) lines.push_back(a.payload + i * kLineSize);

  if (ok) {
    if (cfg_.mode == Mode::Ctxnl && !lines.empty()) {
      co_await port.gsync(lines);
      ++stats_.gsync_calls;
    }
    for (Access& a : at.acc)
      if (a.write) co_await port.store_u64(a.header + kVersionOff, a.version + 1);
  } else if (!lines.empty()) {
    if (cfg_.mode == Mode::Ctxnl) {
      co_await port.wd(lines);
      ++stats_.wd_calls;
    } else {
      for (Access& a : at.acc)
        if (a.written) co_await write_payload(port, a, a.before);
    }
  }
  for (Access& a : at.acc)
    if (a.locked) co_await release(port, a);
  co_return ok;
}

Task<TxnResult> Database::execute(MemPort& port, const Txn& txn, std::uint64_t worker, Rng& rng) {
  TxnResult res;
  const SimTime start = port.now();
  const std::uint64_t ts = next_ts_++;

  // One access per distinct key, in first-touch order; a key written anywhere is written.
  std::vector<TxnOp> ops;
  for (const TxnOp& op : txn.ops) {
    auto it = std::find_if(ops.begin(), ops.end(), [&](const TxnOp& o) { return o.key == op.key; });
    if (it == ops.end())
      ops.push_back(op);
    else
      it->write = it->write || op.write;
  }
  for (const TxnOp& op : ops) touched_.insert(op.key);

  for (;;) {
    ++res.attempts;
    Attempt at;
    at.worker = worker;
    at.ts = ts;
    at.stamp = (worker << 40) | ++stamp_seq_[worker];
    at.acc.resize(ops.size());
    for (std::size_t i = 0; i < ops.size(); ++i) {
      at.acc[i].key = ops[i].key;
      at.acc[i].write = ops[i].write;
    }
    const SimTime t0 = port.now();
    bool committed = (cfg_.algorithm == CcAlgorithm::Silo || cfg_.algorithm == CcAlgorithm::Occ)
                         ? co_await run_optimistic(port, at)
                         : co_await run_locking(port, at);
    if (committed) {
      stats_.exec_ns += at.commit_start - t0;
      stats_.commit_ns += port.now() - at.commit_start;
      record_commit(at, port.now());
      res.committed = true;
      break;
    }
    stats_.abort_ns += port.now() - t0;
    ++res.aborts[static_cast<std::size_t>(at.reason)];
    ++stats_.aborts[static_cast<std::size_t>(at.reason)];
    SimTime cap = cfg_.backoff_ns * std::min<std::uint32_t>(res.attempts, 64);
    SimTime wait = cap / 2 + (cap ? rng.below(cap) : 0);
    port.compute(wait);
    stats_.backoff_ns += wait;
  }
  res.latency_ns = port.now() - start;
  co_return res;
}

std::vector<std::uint8_t> Database::view_payload(NodeId node, std::uint64_t key) const {
  const Tuple& t = tuple(key);
  std::vector<std::uint8_t> out(payload_bytes());
  for (std::uint32_t i = 0; i < lines_; ++i) {
    LineData l = fabric_.view(node, t.payload + i * kLineSize);
    std::memcpy(out.data() + i * kLineSize, l.data(), kLineSize);
  }
  return out;
}

std::string Database::abort_hygiene_scan() const {
  std::ostringstream err;
  int reported = 0;
  const std::vector<std::uint8_t> zeros(payload_bytes(), 0);
  for (std::uint64_t key : touched_) {
    auto it = committed_.find(key);
    const std::vector<std::uint8_t>& want = it == committed_.end() ? zeros : it->second;
    for (NodeId n = 0; n < fabric_.nodes(); ++n) {
      if (view_payload(n, key) == want) continue;
      if (reported++ < 8) err << "key " << key << ": node " << n << " reads uncommitted bytes\n";
    }
  }
  if (reported > 8) err << (reported - 8) << " more mismatches\n";
  return err.str();
}

std::string Database::lock_scan() const {
  std::ostringstream err;
  for (std::uint64_t key : touched_) {
    LineData h = fabric_.view(0, tuple(key).header);
    std::uint64_t lock = load_u64(h.data() + kLockOff);
    std::uint64_t version = load_u64(h.data() + kVersionOff);
    if (lock != 0) err << "key " << key << ": lock word " << lock << " held at quiescence\n";
    if (version & kVersionLock) err << "key " << key << ": version word still locked\n";
  }
  return err.str();
}

// ---------------------------------------------------------------------------

namespace {

// Shortest cycle inside one strongly connected component, by BFS from each member.
std::vector<std::uint32_t> shortest_cycle(const std::vector<std::vector<std::uint32_t>>& adj,
                                          const std::vector<std::uint32_t>& comp_of, std::uint32_t comp,
                                          const std::vector<std::uint32_t>& members) {
  std::vector<std::uint32_t> best;
  std::vector<std::int64_t> parent(adj.size(), -1);
  for (std::uint32_t s : members) {
    std::vector<std::uint32_t> seen;
    std::deque<std::uint32_t> q{s};
    parent[s] = s;
    seen.push_back(s);
    std::int64_t closing = -1;
    while (!q.empty() && closing < 0) {
      std::uint32_t u = q.front();
      q.pop_front();
      for (std::uint32_t v : adj[u]) {
        if (comp_of[v] != comp) continue;
        if (v == s) {
          closing = u;
          break;
        }
        if (parent[v] >= 0) continue;
        parent[v] = u;
        seen.push_back(v);
        q.push_back(v);
      }
    }
    if (closing >= 0) {
      std::vector<std::uint32_t> path;
      for (std::uint32_t x = static_cast<std::uint32_t>(closing); x != s; x = static_cast<std::uint32_t>(parent[x]))
        path.push_back(x);
      path.push_back(s);
      std::reverse(path.begin(), path.end());
      if (best.empty() || path.size() < best.size()) best = path;
    }
    for (std::uint32_t x : seen) parent[x] = -1;
    if (best.size() == 1 || best.size() == 2) break;
  }
  return best;
}

}  // namespace

SerializabilityResult check_serializable(const std::vector<CommittedTxn>& history) {
  SerializabilityResult res;
  const std::uint32_t n = static_cast<std::uint32_t>(history.size());
  std::unordered_map<std::uint64_t, std::unordered_map<std::uint64_t, std::uint32_t>> writer;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (const WriteRecord& w : history[i].writes) {
      auto [it, fresh] = writer[w.key].emplace(w.version, i);
      if (!fresh) {
        res.ok = false;
        res.reason = "key " + std::to_string(w.key) + " version " + std::to_string(w.version) +
                     " installed by txns " + std::to_string(history[it->second].id) + " and " +
                     std::to_string(history[i].id);
        res.cycle = {history[it->second].id, history[i].id};
        return res;
      }
    }
  }
  auto writer_of = [&](std::uint64_t key, std::uint64_t version) -> std::int64_t {
    auto k = writer.find(key);
    if (k == writer.end()) return -1;
    auto v = k->second.find(version);
    return v == k->second.end() ? -1 : static_cast<std::int64_t>(v->second);
  };

  std::vector<std::vector<std::uint32_t>> adj(n);
  auto edge = [&](std::int64_t from, std::int64_t to) {
    if (from < 0 || to < 0 || from == to) return;
    adj[static_cast<std::size_t>(from)].push_back(static_cast<std::uint32_t>(to));
    ++res.edges;
  };
  for (std::uint32_t i = 0; i < n; ++i) {
    for (const ReadRecord& r : history[i].reads) {
      std::int64_t w = r.version == 0 ? -1 : writer_of(r.key, r.version);
      std::uint64_t want = 0;
      if (w >= 0)
        for (const WriteRecord& x : history[static_cast<std::size_t>(w)].writes)
          if (x.key == r.key) want = x.stamp;
      if (r.version != 0 && w < 0) {
        res.ok = false;
        res.reason = "txn " + std::to_string(history[i].id) + " read key " + std::to_string(r.key) + " version " +
                     std::to_string(r.version) + " that no committed txn installed";
        res.cycle = {history[i].id};
        return res;
      }
      if (r.stamp != want) {
        res.ok = false;
        res.reason = "txn " + std::to_string(history[i].id) + " read key " + std::to_string(r.key) +
                     " bytes that differ from the committed version's bytes";
        res.cycle = {history[i].id};
        return res;
      }
      edge(w, i);                                 // wr
      edge(i, writer_of(r.key, r.version + 1));   // rw
    }
    for (const WriteRecord& w : history[i].writes)
      if (w.version > 1) edge(writer_of(w.key, w.version - 1), i);  // ww
  }

  // Iterative Tarjan.
  std::vector<std::int64_t> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::uint32_t> stack, comp_of(n, 0);
  std::uint32_t counter = 0, comps = 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> work;
  for (std::uint32_t root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    work.push_back({root, 0});
    while (!work.empty()) {
      auto& [u, next] = work.back();
      if (next == 0) {
        index[u] = low[u] = counter++;
        stack.push_back(u);
        on_stack[u] = true;
      }
      if (next < adj[u].size()) {
        std::uint32_t v = adj[u][next++];
        if (index[v] < 0)
          work.push_back({v, 0});
        else if (on_stack[v])
          low[u] = std::min(low[u], index[v]);
        continue;
      }
      std::uint32_t done = u;
      work.pop_back();
      if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[done]);
      if (low[done] == index[done]) {
        std::vector<std::uint32_t> members;
        std::uint32_t x;
        do {
          x = stack.back();
          stack.pop_back();
          on_stack[x] = false;
          comp_of[x] = comps;
          members.push_back(x);
        } while (x != done);
        if (members.size() > 1 && res.ok) {
          // Defer witness extraction until components are all labelled.
          res.ok = false;
          res.cycle.assign(members.begin(), members.end());
        }
        ++comps;
      }
    }
  }
  if (!res.ok) {
    std::vector<std::uint32_t> members(res.cycle.begin(), res.cycle.end());
    std::sort(members.begin(), members.end());
    std::vector<std::uint32_t> cyc = shortest_cycle(adj, comp_of, comp_of[members.front()], members);
    res.cycle.clear();
    for (std::uint32_t i : cyc) res.cycle.push_back(history[i].id);
    std::ostringstream why;
    why << "dependency cycle of length " << cyc.size() << ":";
    for (std::uint64_t id : res.cycle) why << " " << id;
    res.reason = why.str();
  }
  return res;
}

}  // namespace gfam
