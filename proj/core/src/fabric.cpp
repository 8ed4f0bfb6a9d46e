#include "gfam/fabric.hpp"

#include <algorithm>
#include <cstring>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "gfam/error.hpp"

namespace gfam {

const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::Ld: return "Ld";
    case OpKind::St: return "St";
    case OpKind::LLd: return "L-Ld";
    case OpKind::LSt: return "L-St";
    case OpKind::GSync: return "GSync";
    case OpKind::Wd: return "Wd";
    case OpKind::Cas: return "CAS";
    case OpKind::Faa: return "FAA";
  }
  return "?";
}

void FabricConfig::validate() const {
  if (nodes == 0 || nodes > kMaxNodes) throw ConfigError("nodes: must be in [1, 16]");
  cache.validate();
  sf.validate();
  shim.validate();
  resize.validate();
  if (queue_depth == 0 || queue_depth > QueuePair::kCompletionBits)
    throw ConfigError("sync.queue_depth: must be in [1, 512]");
  if (!(profile.bus_bytes_per_ns > 0)) throw ConfigError("profile.bus_bytes_per_ns: must be > 0");
}

Fabric::Fabric(const FabricConfig& cfg)
    : cfg_((cfg.validate(), cfg)), dram_(cfg.capacity), segments_(cfg.capacity, cfg.nodes, cfg.chunk_bytes) {
  caches_.reserve(cfg_.nodes);
  for (NodeId n = 0; n < cfg_.nodes; ++n) caches_.emplace_back(cfg_.cache, cfg_.seed, n);
  vanilla_ = std::make_unique<VanillaCoherence>(cfg_.profile, cfg_.sf, caches_, dram_);
  vanilla_->set_victim_handler([this](NodeId n, const CachedLine& v) { handle_victim(n, v); });
  vanilla_->set_classifier([this](Addr a) { return classify(a); });
  shim_ = std::make_unique<ViewShim>(cfg_.shim, cfg_.nodes, cfg_.seed);
  sync_ = std::make_unique<SyncEngine>(cfg_.profile, cfg_.queue_depth, caches_, *shim_, dram_);
  // queue pairs live in the hwconfig segment: ring elements plus one completion line
  for (NodeId n = 0; n < cfg_.nodes; ++n) segments_.hw_alloc(cfg_.queue_depth * 16 + kLineSize);
  monitor_ = std::make_unique<ResizeMonitor>(cfg_.resize, cfg_.profile, *shim_, &segments_);
}

Addr Fabric::cxl_alloc(NodeId node, std::uint64_t bytes, Primitive p, TrafficClass cls) {
  Addr a = segments_.cxl_alloc(node, bytes, p);
  if (cls == TrafficClass::Record && p == Primitive::Vanilla) {
    std::uint64_t rounded = (bytes + kLineSize - 1) / kLineSize * kLineSize;
    record_ranges_[a] = a + rounded;
  }
  return a;
}

TrafficClass Fabric::classify(Addr a) const {
  if (segments_.segment_of(a) == Segment::Ctxnl) return TrafficClass::Record;
  auto it = record_ranges_.upper_bound(a);
  if (it == record_ranges_.begin()) return TrafficClass::Meta;
  --it;
  return a < it->second ? TrafficClass::Record : TrafficClass::Meta;
}

void Fabric::require(Addr addr, std::size_t len, Segment expected, const char* op) const {
  Segment first = segments_.segment_of(addr);
  Segment last = segments_.segment_of(addr + (len ? len - 1 : 0));
  if (first != expected || last != expected)
    throw PrimitiveBindingError(std::string(op) + " on " + to_string(first == expected ? last : first) +
                                " segment address");
}

void Fabric::trace(OpKind k, NodeId node, Addr addr, const Breakdown& cost) {
  if (!trace_) return;
  Segment s = segments_.segment_of(addr);
  *trace_ << now_ << ' ' << node << ' ' << to_string(k) << " 0x" << std::hex << addr << std::dec << ' '
          << (s == Segment::Vanilla ? "vanilla" : "ctxnl") << ' ' << cost.total() << '\n';
}

template <typename F>
static void for_each_piece(Addr addr, std::size_t len, F&& f) {
  std::size_t done = 0;
  while (done < len) {
    Addr a = addr + done;
    Addr line = line_of(a);
    std::size_t off = a - line;
    std::size_t n = std::min<std::size_t>(len - done, kLineSize - off);
    f(line, off, done, n);
    done += n;
  }
}

Breakdown Fabric::load(NodeId node, Addr addr, std::span<std::uint8_t> out, SimTime now) {
  require(addr, out.size(), Segment::Vanilla, "Ld");
  now_ = now;
  Breakdown cost;
  for_each_piece(addr, out.size(), [&](Addr line, std::size_t off, std::size_t done, std::size_t n) {
    LineData d;
    cost += vanilla_->coherent_load(node, line, d);
    std::memcpy(out.data() + done, d.data() + off, n);
  });
  ++stats_.ops[static_cast<int>(OpKind::Ld)];
  stats_.vanilla_time += cost;
  trace(OpKind::Ld, node, addr, cost);
  return cost;
}

Breakdown Fabric::store(NodeId node, Addr addr, std::span<const std::uint8_t> bytes, SimTime now) {
  require(addr, bytes.size(), Segment::Vanilla, "St");
  now_ = now;
  Breakdown cost;
  for_each_piece(addr, bytes.size(), [&](Addr line, std::size_t off, std::size_t done, std::size_t n) {
    cost += vanilla_->coherent_store(node, line, bytes.subspan(done, n), off);
  });
  ++stats_.ops[static_cast<int>(OpKind::St)];
  stats_.vanilla_time += cost;
  trace(OpKind::St, node, addr, cost);
  return cost;
}

RmwResult Fabric::cas(NodeId node, Addr addr, std::uint64_t expect, std::uint64_t desired, SimTime now) {
  require(addr, 8, Segment::Vanilla, "CAS");
  now_ = now;
  RmwResult r = vanilla_->atomic_rmw(node, addr, RmwKind::Cas, expect, desired);
  ++stats_.ops[static_cast<int>(OpKind::Cas)];
  stats_.vanilla_time += r.cost;
  trace(OpKind::Cas, node, addr, r.cost);
  return r;
}

RmwResult Fabric::faa(NodeId node, Addr addr, std::uint64_t delta, SimTime now) {
  require(addr, 8, Segment::Vanilla, "FAA");
  now_ = now;
  RmwResult r = vanilla_->atomic_rmw(node, addr, RmwKind::Faa, delta);
  ++stats_.ops[static_cast<int>(OpKind::Faa)];
  stats_.vanilla_time += r.cost;
  trace(OpKind::Faa, node, addr, r.cost);
  return r;
}

SimTime Fabric::stall_for(NodeId node, Addr line) {
  std::uint32_t t = shim_->table_for(node, line_index(line));
  SimTime until = shim_->vat().info(t).blocked_until;
  if (until <= now_) return 0;
  SimTime s = until - now_;
  stats_.stall_ns += s;
  return s;
}

CachedLine* Fabric::ctxnl_fill(NodeId node, Addr line, Breakdown& cost) {
  if (CachedLine* l = caches_[node].access(line)) return l;
  std::uint64_t li = line_index(line);
  TranslateResult tr = shim_->translate_load(node, li);
  cost.dram += cfg_.profile.c2m_ns;
  cost.ep_logic += cfg_.profile.ep_logic_ns;
  if (tr.vf_positive) {
    cost.ep_logic += stall_for(node, line);
    cost.dram += tr.probes * cfg_.profile.dram_ns;
  }
  LineData data = tr.vms ? tr.data : dram_.read_line(segments_.dram_offset(line));
  FillResult r = caches_[node].fill(line, LineState::Exclusive, data);
  if (r.victim) handle_victim(node, *r.victim);
  return r.line;
}

void Fabric::handle_victim(NodeId node, const CachedLine& v) {
  Segment s = segments_.segment_of(v.tag);
  if (s == Segment::Vanilla) {
    vanilla_->write_back(node, v);
    return;
  }
  if (v.state != LineState::Modified) return;  // clean views drop silently
  std::uint64_t li = line_index(v.tag);
  shim_->vbf_update(node, li, VbfAction::RemoveOnWriteback);
  for (int attempt = 0; attempt < 8; ++attempt) {
    if (shim_->vat_insert(node, li, v.data).status == InsertStatus::Ok) return;
    ++stats_.forced_resizes;
    monitor_->monitor_and_resize(now_);
  }
  throw OutOfMemoryError("VAT could not absorb an overflowed view after resizing");
}

Breakdown Fabric::l_load(NodeId node, Addr addr, std::span<std::uint8_t> out, SimTime now) {
  require(addr, out.size(), Segment::Ctxnl, "L-Ld");
  now_ = now;
  Breakdown cost;
  for_each_piece(addr, out.size(), [&](Addr line, std::size_t off, std::size_t done, std::size_t n) {
    CachedLine* l = ctxnl_fill(node, line, cost);
    std::memcpy(out.data() + done, l->data.data() + off, n);
  });
  ++stats_.ops[static_cast<int>(OpKind::LLd)];
  stats_.ctxnl_time += cost;
  trace(OpKind::LLd, node, addr, cost);
  return cost;
}

Breakdown Fabric::l_store(NodeId node, Addr addr, std::span<const std::uint8_t> bytes, SimTime now) {
  require(addr, bytes.size(), Segment::Ctxnl, "L-St");
  now_ = now;
  Breakdown cost;
  for_each_piece(addr, bytes.size(), [&](Addr line, std::size_t off, std::size_t done, std::size_t n) {
    ctxnl_fill(node, line, cost);
    caches_[node].store_hit(line, bytes.subspan(done, n), off);
  });
  ++stats_.ops[static_cast<int>(OpKind::LSt)];
  stats_.ctxnl_time += cost;
  trace(OpKind::LSt, node, addr, cost);
  return cost;
}

Breakdown Fabric::sync_batch(NodeId node, SyncOp op, std::span<const Addr> addrs, SimTime now) {
  now_ = now;
  std::vector<Addr> lines;
  std::unordered_set<Addr> seen;
  for (Addr a : addrs) {
    require(a, 1, Segment::Ctxnl, op == SyncOp::GSync ? "GSync" : "Wd");
    if (seen.insert(line_of(a)).second) lines.push_back(line_of(a));
  }
  Breakdown cost;
  QueuePair& q = sync_->queue(node);
  std::size_t i = 0;
  while (i < lines.size()) {
    std::size_t n = std::min<std::size_t>(q.free_slots(), lines.size() - i);
    if (n == 0) {
      // only reachable if completions were never acknowledged
      sync_->count_backpressure();
      throw BackpressureError("work queue has no free slots");
    }
    auto seqs = q.post(op, std::span<const Addr>(lines).subspan(i, n));
    cost += sync_->post_cost();
    cost += sync_->drain(node);
    cost += sync_->poll_cost();
    sync_->count_poll();
    if (!q.ready(seqs)) throw ProtocolViolation("completion bits missing after drain");
    q.acknowledge(seqs);
    i += n;
  }
  OpKind k = op == SyncOp::GSync ? OpKind::GSync : OpKind::Wd;
  ++stats_.ops[static_cast<int>(k)];
  stats_.ctxnl_time += cost;
  if (!lines.empty()) trace(k, node, lines.front(), cost);
  return cost;
}

Breakdown Fabric::gsync(NodeId node, std::span<const Addr> addrs, SimTime now) {
  return sync_batch(node, SyncOp::GSync, addrs, now);
}

Breakdown Fabric::wd(NodeId node, std::span<const Addr> addrs, SimTime now) {
  return sync_batch(node, SyncOp::Wd, addrs, now);
}

void Fabric::poke(Addr addr, std::span<const std::uint8_t> bytes) {
  dram_.write(segments_.dram_offset(addr), bytes);
}

void Fabric::peek_dram(Addr addr, std::span<std::uint8_t> out) const {
  dram_.read(segments_.dram_offset(addr), out);
}

LineData Fabric::view(NodeId node, Addr line) const {
  line = line_of(line);
  Segment s = segments_.segment_of(line);
  if (s == Segment::Vanilla) return vanilla_->coherent_value(line);
  if (s == Segment::Ctxnl) {
    if (const CachedLine* l = caches_.at(node).peek(line)) return l->data;
    if (auto v = shim_->peek_view(node, line_index(line))) return *v;
  }
  return dram_.read_line(segments_.dram_offset(line));
}

void Fabric::evict(NodeId node, Addr line, SimTime now) {
  now_ = now;
  const CachedLine* l = caches_.at(node).peek(line);
  if (!l) return;
  CachedLine copy = *l;
  caches_[node].invalidate(line);
  handle_victim(node, copy);
}

void Fabric::evict_all(NodeId node, SimTime now) {
  std::vector<Addr> lines;
  caches_.at(node).for_each_valid([&](const CachedLine& l) { lines.push_back(l.tag); });
  for (Addr l : lines) evict(node, l, now);
}

void Fabric::tick(SimTime now) {
  now_ = now;
  monitor_->tick(now);
}

std::string Fabric::check_invariants() const {
  std::ostringstream err;
  err << vanilla_->check_invariants(
      [this](Addr a) { return segments_.segment_of(a) == Segment::Vanilla; });
  err << shim_->check_invariants();
  for (NodeId n = 0; n < caches_.size(); ++n) {
    caches_[n].for_each_valid([&](const CachedLine& l) {
      if (segments_.segment_of(l.tag) != Segment::Ctxnl) return;
      if (!shim_->vbf_query(n, line_index(l.tag)))
        err << "vbf false negative: node " << n << " caches line " << l.tag << "\n";
    });
  }
  return err.str();
}

}  // namespace gfam
