#include "gfam/runtime.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "gfam/error.hpp"

namespace gfam {

const char* to_string(Segment s) {
  switch (s) {
    case Segment::Vanilla: return "vanilla";
    case Segment::Ctxnl: return "ctxnl";
    case Segment::HwConfig: return "hwconfig";
  }
  return "?";
}

const char* to_string(ResizeAction::Kind k) {
  switch (k) {
    case ResizeAction::Kind::Split: return "split";
    case ResizeAction::Kind::Rehash: return "rehash";
    case ResizeAction::Kind::Merge: return "merge";
  }
  return "?";
}

SegmentMap::SegmentMap(std::uint64_t capacity, std::uint32_t nodes, std::uint64_t chunk_bytes)
    : capacity_(capacity), nodes_(nodes), chunk_(chunk_bytes), app_cursor_(nodes, 0), hw_cursor_(capacity) {
  if (nodes == 0 || nodes > kMaxNodes) throw ConfigError("nodes: must be in [1, 16]");
  if (chunk_ == 0 || chunk_ % kLineSize != 0) throw ConfigError("hw.chunk_bytes: must be a positive multiple of 64");
  if (capacity_ == 0 || capacity_ % chunk_ != 0)
    throw ConfigError("gfam.capacity: must be a positive multiple of hw.chunk_bytes");
  slice_ = (capacity_ / nodes_) & ~static_cast<std::uint64_t>(kLineSize - 1);
  for (std::uint32_t n = 0; n < nodes_; ++n) app_cursor_[n] = n * slice_;
}

Segment SegmentMap::segment_of(Addr a) const {
  std::uint64_t s = a / capacity_;
  if (s > 2) throw ConfigError("address beyond the hwconfig segment");
  return static_cast<Segment>(s);
}

Addr SegmentMap::cxl_alloc(NodeId node, std::uint64_t bytes, Primitive p) {
  if (node >= nodes_) throw ConfigError("cxl_alloc: unknown node");
  if (bytes == 0) throw ConfigError("cxl_alloc: size must be > 0");
  std::uint64_t rounded = (bytes + kLineSize - 1) / kLineSize * kLineSize;
  std::uint64_t start = app_cursor_[node];
  std::uint64_t limit = std::min<std::uint64_t>((node + 1) * slice_, hw_cursor_);
  if (rounded > limit || start > limit - rounded)
    throw OutOfMemoryError("cxl_alloc: node " + std::to_string(node) + " application space exhausted");
  app_cursor_[node] = start + rounded;
  Segment seg = p == Primitive::Vanilla ? Segment::Vanilla : Segment::Ctxnl;
  Addr a = address(seg, start);
  app_live_.push_back({seg, a, rounded});
  return a;
}

Addr SegmentMap::hw_alloc(std::uint64_t bytes) {
  if (bytes == 0) throw ConfigError("hw_alloc: size must be > 0");
  std::uint64_t need = (bytes + chunk_ - 1) / chunk_;
  for (auto it = free_.begin(); it != free_.end(); ++it) {
    if (it->chunks < need) continue;
    std::uint64_t off = it->offset;
    it->offset += need * chunk_;
    it->chunks -= need;
    if (it->chunks == 0) free_.erase(it);
    hw_live_[off] = need;
    return address(Segment::HwConfig, off);
  }
  std::uint64_t top_app = *std::max_element(app_cursor_.begin(), app_cursor_.end());
  std::uint64_t span = need * chunk_;
  if (span > hw_cursor_ || hw_cursor_ - span < top_app)
    throw OutOfMemoryError("hw_alloc: hwconfig region would overlap application space");
  hw_cursor_ -= span;
  hw_live_[hw_cursor_] = need;
  return address(Segment::HwConfig, hw_cursor_);
}

void SegmentMap::hw_free(Addr addr) {
  if (segment_of(addr) != Segment::HwConfig) throw ConfigError("hw_free: address not in hwconfig segment");
  std::uint64_t off = dram_offset(addr);
  auto live = hw_live_.find(off);
  if (live == hw_live_.end()) throw ConfigError("hw_free: address was not allocated");
  Block b{off, live->second};
  hw_live_.erase(live);

  auto it = std::find_if(free_.begin(), free_.end(), [&](const Block& x) { return x.offset > off; });
  it = free_.insert(it, b);
  auto next = std::next(it);
  if (next != free_.end() && it->offset + it->chunks * chunk_ == next->offset) {
    it->chunks += next->chunks;
    free_.erase(next);
  }
  if (it != free_.begin()) {
    auto prev = std::prev(it);
    if (prev->offset + prev->chunks * chunk_ == it->offset) {
      prev->chunks += it->chunks;
      free_.erase(it);
    }
  }
}

std::vector<Allocation> SegmentMap::allocations() const {
  std::vector<Allocation> out = app_live_;
  for (const auto& [off, chunks] : hw_live_)
    out.push_back({Segment::HwConfig, address(Segment::HwConfig, off), chunks * chunk_});
  std::sort(out.begin(), out.end(), [](const Allocation& a, const Allocation& b) { return a.addr < b.addr; });
  return out;
}

void ResizePolicy::validate() const {
  if (interval_ns == 0) throw ConfigError("resize.interval_ms: must be > 0");
  if (!(shrink >= 0 && shrink < expand && expand <= 1.0))
    throw ConfigError("resize.shrink/resize.expand: need 0 <= shrink < expand <= 1");
  if (k < 2 || !std::has_single_bit(k)) throw ConfigError("resize.k: must be a power of two >= 2");
}

ResizeMonitor::ResizeMonitor(const ResizePolicy& policy, const LatencyProfile& profile, ViewShim& shim,
                             SegmentMap* segments)
    : policy_(policy), profile_(profile), shim_(shim), segments_(segments), next_check_(policy.interval_ns) {
  policy_.validate();
  for (std::uint32_t t : shim_.vat().live_tables()) account_table_memory(t);
}

void ResizeMonitor::account_table_memory(std::uint32_t t) {
  if (!segments_) return;
  const CuckooTable& tb = shim_.vat().table(t);
  table_memory_[t] = segments_->hw_alloc(tb.entries() * (sizeof(std::uint64_t) + kLineSize));
}

void ResizeMonitor::release_table_memory(std::uint32_t t) {
  auto it = table_memory_.find(t);
  if (it == table_memory_.end()) return;
  segments_->hw_free(it->second);
  table_memory_.erase(it);
}

void ResizeMonitor::block(std::uint32_t table, SimTime now, SimTime duration) {
  auto& info = shim_.vat().info(table);
  info.blocked_until = std::max(info.blocked_until, now + duration);
  stats_.blocked_ns += duration;
}

std::vector<ResizeAction> ResizeMonitor::tick(SimTime now) {
  if (now < next_check_) return {};
  next_check_ = (now / policy_.interval_ns + 1) * policy_.interval_ns;
  return monitor_and_resize(now);
}

std::vector<ResizeAction> ResizeMonitor::monitor_and_resize(SimTime now) {
  ++stats_.monitor_runs;
  std::vector<ResizeAction> actions;
  ViewAddressTable& vat = shim_.vat();
  for (std::uint32_t t : vat.live_tables()) {
    auto& info = vat.info(t);
    if (!info.table) continue;
    double load = info.table->load();
    if (load > policy_.expand || info.resizing_error) {
      ResizeAction a{ResizeAction::Kind::Split, t, {}, 0, 0};
      ResizeOutcome out = vat.split(t, policy_.k);
      if (out.done) {
        ++stats_.splits;
        for (std::uint32_t id : out.tables) account_table_memory(id);
      } else {
        out = vat.rehash(t, policy_.k);
        a.kind = ResizeAction::Kind::Rehash;
        ++stats_.rehash_fallbacks;
        release_table_memory(t);
        account_table_memory(t);
      }
      a.tables = out.tables;
      a.moved_entries = out.moved_entries;
      a.blocked_ns = profile_.link_rt_ns + 2 * out.moved_entries * profile_.dram_ns;
      block(t, now, a.blocked_ns);
      for (std::uint32_t id : out.tables) block(id, now, a.blocked_ns);
      actions.push_back(std::move(a));
    } else if (load < policy_.shrink && info.parent != kNoTable && vat.info(info.parent).table) {
      const CuckooTable& parent = vat.table(info.parent);
      double merged = static_cast<double>(parent.occupancy() + info.table->occupancy()) /
                      static_cast<double>(parent.entries());
      if (merged >= policy_.expand) continue;
      std::uint32_t parent_id = info.parent;
      ResizeOutcome out = vat.merge(t);
      if (!out.done) continue;
      ++stats_.merges;
      release_table_memory(t);
      ResizeAction a{ResizeAction::Kind::Merge, t, out.tables, out.moved_entries, 0};
      a.blocked_ns = profile_.link_rt_ns + 2 * out.moved_entries * profile_.dram_ns;
      block(parent_id, now, a.blocked_ns);
      actions.push_back(std::move(a));
    }
  }
  if (!actions.empty()) {
    stats_.resize_events += actions.size();
    shim_.rebuild_all_vfs();
  }
  return actions;
}

}  // namespace gfam
