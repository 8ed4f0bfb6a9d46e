#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gfam/dram.hpp"
#include "gfam/simcore.hpp"

namespace gfam {

enum class LineState : std::uint8_t { Invalid, Shared, Exclusive, Modified };
enum class EvictionPolicy { Lru, Random };

const char* to_string(LineState s);

struct CacheConfig {
  // L2 (2MB) + L3 slice (1.875MB) collapsed into one level
  std::uint64_t capacity_bytes = 4063232;
  std::uint32_t associativity = 16;
  EvictionPolicy policy = EvictionPolicy::Lru;

  void validate() const;  // throws ConfigError
  std::uint64_t lines() const { return capacity_bytes / kLineSize; }
  std::uint64_t sets() const { return lines() / associativity; }
};

struct CachedLine {
  Addr tag = 0;
  LineState state = LineState::Invalid;
  LineData data{};
  std::uint64_t lru_rank = 0;

  bool valid() const { return state != LineState::Invalid; }
};

struct FillResult {
  std::optional<CachedLine> victim;
  CachedLine* line = nullptr;
};

enum class InvalidateKind { Absent, WasClean, WasModified };

struct InvalidateResult {
  InvalidateKind kind = InvalidateKind::Absent;
  LineData data{};  // meaningful for WasModified
};

// One node's unified cache over fabric lines.
class NodeCache {
 public:
  NodeCache(const CacheConfig& cfg, std::uint64_t seed, NodeId node);

  const CacheConfig& config() const { return cfg_; }

  // Pure query; does not touch replacement state.
  std::optional<LineState> lookup(Addr line) const;
  const CachedLine* peek(Addr line) const;
  // Query that counts as a use for replacement purposes.
  CachedLine* access(Addr line);

  FillResult fill(Addr line, LineState state, const LineData& data);
  void store_hit(Addr line, std::span<const std::uint8_t> bytes, std::size_t offset);
  InvalidateResult invalidate(Addr line);
  // Downgrades an Exclusive/Modified copy to Shared; returns dirty data if it was Modified.
  std::optional<LineData> downgrade(Addr line);

  std::uint64_t occupancy() const { return occupancy_; }
  template <typename F>
  void for_each_valid(F&& f) const {
    for (const auto& l : lines_)
      if (l.valid()) f(l);
  }

 private:
  std::size_t set_of(Addr line) const;
  CachedLine* find(Addr line);
  const CachedLine* find(Addr line) const;

  CacheConfig cfg_;
  std::uint64_t sets_;
  std::vector<CachedLine> lines_;
  std::uint64_t tick_ = 0;
  std::uint64_t occupancy_ = 0;
  Rng rng_;
};

}  // namespace gfam
