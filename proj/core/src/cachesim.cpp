#include "gfam/cachesim.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#include "gfam/error.hpp"

namespace gfam {

const char* to_string(LineState s) {
  switch (s) {
    case LineState::Invalid: return "I";
    case LineState::Shared: return "S";
    case LineState::Exclusive: return "E";
    case LineState::Modified: return "M";
  }
  return "?";
}

void CacheConfig::validate() const {
  if (associativity == 0) throw ConfigError("cache.assoc: must be > 0");
  if (capacity_bytes == 0 || capacity_bytes % (std::uint64_t{associativity} * kLineSize) != 0)
    throw ConfigError("cache.capacity: must be a positive multiple of assoc * 64 (got " +
                      std::to_string(capacity_bytes) + ")");
}

NodeCache::NodeCache(const CacheConfig& cfg, std::uint64_t seed, NodeId node)
    : cfg_(cfg), rng_(seed, 0xCAC4E000ULL + node) {
  cfg_.validate();
  sets_ = cfg_.sets();
  lines_.resize(sets_ * cfg_.associativity);
}

static void require_aligned(Addr line) {
  if (!is_line_aligned(line)) throw AlignmentError("cache access to unaligned line address");
}

std::size_t NodeCache::set_of(Addr line) const { return (line / kLineSize) % sets_; }

CachedLine* NodeCache::find(Addr line) {
  std::size_t base = set_of(line) * cfg_.associativity;
  for (std::size_t w = 0; w < cfg_.associativity; ++w) {
    CachedLine& l = lines_[base + w];
    if (l.valid() && l.tag == line) return &l;
  }
  return nullptr;
}

const CachedLine* NodeCache::find(Addr line) const {
  return const_cast<NodeCache*>(this)->find(line);
}

std::optional<LineState> NodeCache::lookup(Addr line) const {
  require_aligned(line);
  const CachedLine* l = find(line);
  if (!l) return std::nullopt;
  return l->state;
}

const CachedLine* NodeCache::peek(Addr line) const {
  require_aligned(line);
  return find(line);
}

CachedLine* NodeCache::access(Addr line) {
  require_aligned(line);
  CachedLine* l = find(line);
  if (l) l->lru_rank = ++tick_;
  return l;
}

FillResult NodeCache::fill(Addr line, LineState state, const LineData& data) {
  require_aligned(line);
  if (state == LineState::Invalid) throw ProtocolViolation("fill with Invalid state");
  FillResult r;
  if (CachedLine* l = find(line)) {
    l->state = state;
    l->data = data;
    l->lru_rank = ++tick_;
    r.line = l;
    return r;
  }
  std::size_t base = set_of(line) * cfg_.associativity;
  CachedLine* slot = nullptr;
  for (std::size_t w = 0; w < cfg_.associativity; ++w) {
    if (!lines_[base + w].valid()) {
      slot = &lines_[base + w];
      break;
    }
  }
  if (!slot) {
    if (cfg_.policy == EvictionPolicy::Random) {
      slot = &lines_[base + rng_.below(cfg_.associativity)];
    } else {
      slot = &lines_[base];
      for (std::size_t w = 1; w < cfg_.associativity; ++w)
        if (lines_[base + w].lru_rank < slot->lru_rank) slot = &lines_[base + w];
    }
    r.victim = *slot;
  } else {
    ++occupancy_;
  }
  slot->tag = line;
  slot->state = state;
  slot->data = data;
  slot->lru_rank = ++tick_;
  r.line = slot;
  return r;
}

void NodeCache::store_hit(Addr line, std::span<const std::uint8_t> bytes, std::size_t offset) {
  require_aligned(line);
  if (offset + bytes.size() > kLineSize) throw AlignmentError("store_hit crosses a line boundary");
  CachedLine* l = find(line);
  if (!l || (l->state != LineState::Exclusive && l->state != LineState::Modified))
    throw ProtocolViolation("store_hit on a line not held Exclusive or Modified");
  std::memcpy(l->data.data() + offset, bytes.data(), bytes.size());
  l->state = LineState::Modified;
  l->lru_rank = ++tick_;
}

InvalidateResult NodeCache::invalidate(Addr line) {
  require_aligned(line);
  InvalidateResult r;
  CachedLine* l = find(line);
  if (!l) return r;
  if (l->state == LineState::Modified) {
    r.kind = InvalidateKind::WasModified;
    r.data = l->data;
  } else {
    r.kind = InvalidateKind::WasClean;
  }
  l->state = LineState::Invalid;
  --occupancy_;
  return r;
}

std::optional<LineData> NodeCache::downgrade(Addr line) {
  require_aligned(line);
  CachedLine* l = find(line);
  if (!l) return std::nullopt;
  std::optional<LineData> dirty;
  if (l->state == LineState::Modified) dirty = l->data;
  l->state = LineState::Shared;
  return dirty;
}

}  // namespace gfam
