#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gfam/cachesim.hpp"
#include "gfam/dram.hpp"
#include "gfam/simcore.hpp"

namespace gfam {

enum class TrafficClass : std::uint8_t { Meta = 0, Record = 1 };

struct SnoopFilterConfig {
  std::uint64_t entries = 128 * 1024;
  std::uint32_t ways = 16;

  void validate() const;
  std::uint64_t sets() const { return entries / ways; }
};

struct SfEntry {
  Addr tag = 0;
  std::uint16_t sharers = 0;  // bit per node
  std::int8_t owner = -1;     // set while held Exclusive/Modified
  bool valid = false;
  std::uint64_t lru_rank = 0;

  bool exclusive() const { return owner >= 0; }
};

class SnoopFilter {
 public:
  explicit SnoopFilter(const SnoopFilterConfig& cfg);

  SfEntry* find(Addr line);
  const SfEntry* find(Addr line) const;
  void touch(SfEntry& e) { e.lru_rank = ++tick_; }
  // Returns a free slot in the line's set, or nullptr if the set is full.
  SfEntry* free_slot(Addr line);
  SfEntry& lru_victim(Addr line);
  SfEntry& install(SfEntry& slot, Addr line);
  void release(SfEntry& e);

  std::uint64_t occupancy() const { return occupancy_; }
  const SnoopFilterConfig& config() const { return cfg_; }
  template <typename F>
  void for_each_valid(F&& f) const {
    for (const auto& e : entries_)
      if (e.valid) f(e);
  }

 private:
  std::size_t base_of(Addr line) const { return ((line / kLineSize) % sets_) * cfg_.ways; }

  SnoopFilterConfig cfg_;
  std::uint64_t sets_;
  std::vector<SfEntry> entries_;
  std::uint64_t tick_ = 0;
  std::uint64_t occupancy_ = 0;
};

struct TrafficCounters {
  std::uint64_t loads = 0;
  std::uint64_t stores = 0;
  std::uint64_t rmws = 0;
  std::uint64_t misses = 0;
  std::uint64_t remote_signals = 0;
  std::uint64_t bi_invalidations = 0;
  std::uint64_t sf_evictions = 0;
  std::uint64_t ownership_transfers = 0;

  TrafficCounters& operator+=(const TrafficCounters& o);
  bool operator==(const TrafficCounters&) const = default;
};

struct VanillaStats {
  std::array<TrafficCounters, 2> by_class{};  // indexed by TrafficClass

  const TrafficCounters& meta() const { return by_class[0]; }
  const TrafficCounters& record() const { return by_class[1]; }
  TrafficCounters total() const;
};

enum class RmwKind { Cas, Faa };

struct RmwResult {
  std::uint64_t old_value = 0;
  bool success = false;
  Breakdown cost;
};

// Strict MESI coherence over an inclusive endpoint snoop filter. Lines are
// absolute fabric addresses; DRAM offset is the address modulo DRAM capacity.
class VanillaCoherence {
 public:
  using VictimHandler = std::function<void(NodeId, const CachedLine&)>;
  using Classifier = std::function<TrafficClass(Addr)>;

  VanillaCoherence(const LatencyProfile& profile, const SnoopFilterConfig& sf_cfg,
                   std::vector<NodeCache>& caches, Dram& dram);

  // Routes capacity victims of fills made here; defaults to write_back().
  void set_victim_handler(VictimHandler h) { on_victim_ = std::move(h); }
  void set_classifier(Classifier c) { classify_ = std::move(c); }

  Breakdown coherent_load(NodeId node, Addr line, LineData& out);
  Breakdown coherent_store(NodeId node, Addr line, std::span<const std::uint8_t> bytes,
                           std::size_t offset);
  RmwResult atomic_rmw(NodeId node, Addr addr, RmwKind kind, std::uint64_t a, std::uint64_t b = 0);

  // Capacity eviction of a vanilla line from a node cache.
  void write_back(NodeId node, const CachedLine& victim);

  // Value a coherent load would return right now, without side effects.
  LineData coherent_value(Addr line) const;

  // SWMR and inclusivity over lines accepted by `covers`. Empty string when clean.
  std::string check_invariants(const std::function<bool(Addr)>& covers) const;

  const VanillaStats& stats() const { return stats_; }
  SnoopFilter& snoop_filter() { return sf_; }
  const SnoopFilter& snoop_filter() const { return sf_; }

 private:
  TrafficCounters& ctr(Addr line) { return stats_.by_class[static_cast<int>(classify_(line))]; }
  std::uint64_t offset(Addr line) const { return line % dram_.capacity(); }
  SfEntry& sf_acquire(Addr line, Breakdown& cost);
  void sf_evict(SfEntry& victim, Breakdown& cost);
  CachedLine* fill(NodeId node, Addr line, LineState st, const LineData& data);
  CachedLine* acquire_exclusive(NodeId node, Addr line, Breakdown& cost);

  LatencyProfile profile_;
  SnoopFilter sf_;
  std::vector<NodeCache>& caches_;
  Dram& dram_;
  VictimHandler on_victim_;
  Classifier classify_;
  VanillaStats stats_;
};

}  // namespace gfam
