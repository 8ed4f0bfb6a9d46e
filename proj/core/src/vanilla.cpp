#include "gfam/vanilla.hpp"

#include <cstring>
#include <sstream>
#include <unordered_map>

#include "gfam/error.hpp"

namespace gfam {

void SnoopFilterConfig::validate() const {
  if (ways == 0 || entries == 0 || entries % ways != 0)
    throw ConfigError("sf.entries: must be a positive multiple of sf.ways");
  if (ways > 64) throw ConfigError("sf.ways: must be <= 64");
}

SnoopFilter::SnoopFilter(const SnoopFilterConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  sets_ = cfg_.sets();
  entries_.resize(cfg_.entries);
}

SfEntry* SnoopFilter::find(Addr line) {
  std::size_t base = base_of(line);
  for (std::size_t w = 0; w < cfg_.ways; ++w) {
    SfEntry& e = entries_[base + w];
    if (e.valid && e.tag == line) return &e;
  }
  return nullptr;
}

const SfEntry* SnoopFilter::find(Addr line) const { return const_cast<SnoopFilter*>(this)->find(line); }

SfEntry* SnoopFilter::free_slot(Addr line) {
  std::size_t base = base_of(line);
  for (std::size_t w = 0; w < cfg_.ways; ++w)
    if (!entries_[base + w].valid) return &entries_[base + w];
  return nullptr;
}

SfEntry& SnoopFilter::lru_victim(Addr line) {
  std::size_t base = base_of(line);
  SfEntry* v = &entries_[base];
  for (std::size_t w = 1; w < cfg_.ways; ++w)
    if (entries_[base + w].lru_rank < v->lru_rank) v = &entries_[base + w];
  return *v;
}

SfEntry& SnoopFilter::install(SfEntry& slot, Addr line) {
  if (slot.valid) throw ProtocolViolation("snoop filter install over a live entry");
  slot = SfEntry{};
  slot.tag = line;
  slot.valid = true;
  slot.lru_rank = ++tick_;
  ++occupancy_;
  return slot;
}

void SnoopFilter::release(SfEntry& e) {
  if (!e.valid) return;
  e = SfEntry{};
  --occupancy_;
}

TrafficCounters& TrafficCounters::operator+=(const TrafficCounters& o) {
  loads += o.loads;
  stores += o.stores;
  rmws += o.rmws;
  misses += o.misses;
  remote_signals += o.remote_signals;
  bi_invalidations += o.bi_invalidations;
  sf_evictions += o.sf_evictions;
  ownership_transfers += o.ownership_transfers;
  return *this;
}

TrafficCounters VanillaStats::total() const {
  TrafficCounters t = by_class[0];
  t += by_class[1];
  return t;
}

VanillaCoherence::VanillaCoherence(const LatencyProfile& profile, const SnoopFilterConfig& sf_cfg,
                                   std::vector<NodeCache>& caches, Dram& dram)
    : profile_(profile), sf_(sf_cfg), caches_(caches), dram_(dram) {
  if (caches_.size() > kMaxNodes) throw ConfigError("nodes: at most 16 supported");
  on_victim_ = [this](NodeId n, const CachedLine& v) { write_back(n, v); };
  classify_ = [](Addr) { return TrafficClass::Meta; };
}

void VanillaCoherence::sf_evict(SfEntry& victim, Breakdown& cost) {
  TrafficCounters& c = ctr(victim.tag);
  for (NodeId n = 0; n < caches_.size(); ++n) {
    if (!(victim.sharers & (1u << n))) continue;
    ++c.bi_invalidations;
    auto r = caches_[n].invalidate(victim.tag);
    if (r.kind == InvalidateKind::WasModified) dram_.write_line(offset(victim.tag), r.data);
  }
  ++c.sf_evictions;
  cost.sf_bi += 3 * profile_.link_rt_ns;
  sf_.release(victim);
}

SfEntry& VanillaCoherence::sf_acquire(Addr line, Breakdown& cost) {
  if (SfEntry* e = sf_.find(line)) {
    sf_.touch(*e);
    return *e;
  }
  SfEntry* slot = sf_.free_slot(line);
  if (!slot) {
    slot = &sf_.lru_victim(line);
    sf_evict(*slot, cost);
  }
  return sf_.install(*slot, line);
}

CachedLine* VanillaCoherence::fill(NodeId node, Addr line, LineState st, const LineData& data) {
  auto r = caches_[node].fill(line, st, data);
  CachedLine* l = r.line;
  if (r.victim) on_victim_(node, *r.victim);
  return l;
}

void VanillaCoherence::write_back(NodeId node, const CachedLine& victim) {
  if (victim.state != LineState::Modified) return;  // clean drops are silent
  dram_.write_line(offset(victim.tag), victim.data);
  if (SfEntry* e = sf_.find(victim.tag)) {
    e->sharers &= static_cast<std::uint16_t>(~(1u << node));
    if (e->owner == static_cast<std::int8_t>(node)) e->owner = -1;
    if (e->sharers == 0) sf_.release(*e);
  }
}

Breakdown VanillaCoherence::coherent_load(NodeId node, Addr line, LineData& out) {
  if (!is_line_aligned(line)) throw AlignmentError("coherent_load of unaligned line");
  Breakdown cost;
  TrafficCounters& c = ctr(line);
  ++c.loads;
  if (CachedLine* l = caches_[node].access(line)) {
    out = l->data;
    return cost;
  }
  ++c.misses;
  const std::uint16_t me = static_cast<std::uint16_t>(1u << node);
  SfEntry& e = sf_acquire(line, cost);
  LineState st;
  if (e.exclusive() && e.owner != static_cast<std::int8_t>(node)) {
    NodeCache& owner = caches_[static_cast<NodeId>(e.owner)];
    if (auto dirty = owner.downgrade(line)) dram_.write_line(offset(line), *dirty);
    cost.remote_signal += profile_.c2c_ns;
    ++c.remote_signals;
    e.owner = -1;
    e.sharers |= me;
    st = LineState::Shared;
  } else {
    cost.dram += profile_.c2m_ns;
    if ((e.sharers & ~me) == 0) {
      e.owner = static_cast<std::int8_t>(node);
      e.sharers = me;
      st = LineState::Exclusive;
    } else {
      e.owner = -1;
      e.sharers |= me;
      st = LineState::Shared;
    }
  }
  out = dram_.read_line(offset(line));
  fill(node, line, st, out);
  return cost;
}

CachedLine* VanillaCoherence::acquire_exclusive(NodeId node, Addr line, Breakdown& cost) {
  TrafficCounters& c = ctr(line);
  CachedLine* l = caches_[node].access(line);
  if (l && (l->state == LineState::Exclusive || l->state == LineState::Modified)) return l;
  if (!l) ++c.misses;

  const std::uint16_t me = static_cast<std::uint16_t>(1u << node);
  SfEntry& e = sf_acquire(line, cost);
  if (e.exclusive() && e.owner != static_cast<std::int8_t>(node)) {
    auto owner = static_cast<NodeId>(e.owner);
    auto r = caches_[owner].invalidate(line);
    if (r.kind == InvalidateKind::WasModified) dram_.write_line(offset(line), r.data);
    cost.remote_signal += profile_.c2c_ns;
    ++c.remote_signals;
    ++c.ownership_transfers;
  } else if (e.sharers & ~me) {
    for (NodeId n = 0; n < caches_.size(); ++n) {
      if (n == node || !(e.sharers & (1u << n))) continue;
      ++c.bi_invalidations;
      auto r = caches_[n].invalidate(line);
      if (r.kind == InvalidateKind::WasModified) dram_.write_line(offset(line), r.data);
    }
    cost.remote_signal += profile_.c2c_ns;
  } else {
    cost.dram += profile_.c2m_ns;
  }
  e.owner = static_cast<std::int8_t>(node);
  e.sharers = me;

  // The requester's own Shared copy may have been dropped by the SF eviction above.
  l = caches_[node].access(line);
  if (l) {
    l->state = LineState::Exclusive;
    return l;
  }
  return fill(node, line, LineState::Exclusive, dram_.read_line(offset(line)));
}

Breakdown VanillaCoherence::coherent_store(NodeId node, Addr line,
                                           std::span<const std::uint8_t> bytes,
                                           std::size_t off) {
  if (!is_line_aligned(line)) throw AlignmentError("coherent_store of unaligned line");
  if (off + bytes.size() > kLineSize) throw AlignmentError("coherent_store crosses a line");
  Breakdown cost;
  ++ctr(line).stores;
  acquire_exclusive(node, line, cost);
  caches_[node].store_hit(line, bytes, off);
  return cost;
}

RmwResult VanillaCoherence::atomic_rmw(NodeId node, Addr addr, RmwKind kind, std::uint64_t a,
                                       std::uint64_t b) {
  if (addr % 8 != 0) throw AlignmentError("atomic operand must be 8-byte aligned");
  Addr line = line_of(addr);
  std::size_t off = addr - line;
  RmwResult r;
  ++ctr(line).rmws;
  CachedLine* l = acquire_exclusive(node, line, r.cost);
  r.old_value = load_u64(l->data.data() + off);
  std::uint64_t next = 0;
  if (kind == RmwKind::Cas) {
    r.success = r.old_value == a;
    next = b;
  } else {
    r.success = true;
    next = r.old_value + a;
  }
  if (r.success) {
    std::array<std::uint8_t, 8> buf{};
    store_u64(buf.data(), next);
    caches_[node].store_hit(line, buf, off);
  }
  return r;
}

LineData VanillaCoherence::coherent_value(Addr line) const {
  for (const auto& c : caches_) {
    const CachedLine* l = c.peek(line);
    if (l && l->state == LineState::Modified) return l->data;
  }
  return dram_.read_line(offset(line));
}

std::string VanillaCoherence::check_invariants(const std::function<bool(Addr)>& covers) const {
  std::ostringstream err;
  struct Holders {
    int exclusive = 0;
    int shared = 0;
  };
  std::unordered_map<Addr, Holders> seen;
  for (NodeId n = 0; n < caches_.size(); ++n) {
    caches_[n].for_each_valid([&](const CachedLine& l) {
      if (!covers(l.tag)) return;
      auto& h = seen[l.tag];
      if (l.state == LineState::Shared)
        ++h.shared;
      else
        ++h.exclusive;
      const SfEntry* e = sf_.find(l.tag);
      if (!e || !(e->sharers & (1u << n)))
        err << "inclusivity: line " << l.tag << " cached at node " << n << " without SF bit\n";
    });
  }
  for (const auto& [line, h] : seen) {
    if (h.exclusive > 1 || (h.exclusive == 1 && h.shared > 0))
      err << "swmr: line " << line << " has " << h.exclusive << " writers and " << h.shared
          << " readers\n";
  }
  return err.str();
}

}  // namespace gfam
