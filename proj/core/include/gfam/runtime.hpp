#pragma once

#include <cstdint>
#include <list>
#include <map>
#include <vector>

#include "gfam/simcore.hpp"
#include "gfam/viewshim.hpp"

namespace gfam {

// The fabric DRAM is exposed three times; the segment picks the primitive.
enum class Segment : std::uint8_t { Vanilla = 0, Ctxnl = 1, HwConfig = 2 };
enum class Primitive : std::uint8_t { Vanilla, Ctxnl };

const char* to_string(Segment s);

struct Allocation {
  Segment segment;
  Addr addr;
  std::uint64_t bytes;
};

class SegmentMap {
 public:
  SegmentMap(std::uint64_t capacity, std::uint32_t nodes, std::uint64_t chunk_bytes = 64 * 1024);

  std::uint64_t capacity() const { return capacity_; }
  Segment segment_of(Addr a) const;  // throws ConfigError past the hwconfig segment
  std::uint64_t dram_offset(Addr a) const { return a % capacity_; }
  Addr address(Segment s, std::uint64_t offset) const {
    return static_cast<Addr>(s) * capacity_ + offset;
  }

  // Bump allocation from the node's static slice of the application space.
  Addr cxl_alloc(NodeId node, std::uint64_t bytes, Primitive p);
  // First-fit over freed chunks, else grow the hwconfig region downward.
  Addr hw_alloc(std::uint64_t bytes);
  void hw_free(Addr addr);

  std::uint64_t app_cursor(NodeId node) const { return app_cursor_.at(node); }
  std::uint64_t hw_cursor() const { return hw_cursor_; }
  std::uint64_t chunk_bytes() const { return chunk_; }
  std::size_t free_blocks() const { return free_.size(); }

  // Live allocations in address order, for disjointness checks.
  std::vector<Allocation> allocations() const;

 private:
  struct Block {
    std::uint64_t offset;
    std::uint64_t chunks;
  };

  std::uint64_t capacity_;
  std::uint32_t nodes_;
  std::uint64_t chunk_;
  std::uint64_t slice_;
  std::vector<std::uint64_t> app_cursor_;  // DRAM offsets
  std::uint64_t hw_cursor_;
  std::list<Block> free_;  // sorted by offset
  std::map<std::uint64_t, std::uint64_t> hw_live_;  // offset -> chunks
  std::vector<Allocation> app_live_;
};

struct ResizePolicy {
  SimTime interval_ns = 10'000'000;  // 10 ms
  double expand = 0.6;
  double shrink = 0.01;
  std::uint32_t k = 2;

  void validate() const;
};

struct ResizeAction {
  enum class Kind { Split, Rehash, Merge } kind;
  std::uint32_t table;
  std::vector<std::uint32_t> tables;
  std::uint64_t moved_entries = 0;
  SimTime blocked_ns = 0;
};

const char* to_string(ResizeAction::Kind k);

struct RuntimeStats {
  std::uint64_t monitor_runs = 0;
  std::uint64_t resize_events = 0;
  std::uint64_t splits = 0;
  std::uint64_t rehash_fallbacks = 0;
  std::uint64_t merges = 0;
  SimTime blocked_ns = 0;  // table-blocked time scheduled by resizes
};

// Periodic VAT occupancy check and resizing.
class ResizeMonitor {
 public:
  ResizeMonitor(const ResizePolicy& policy, const LatencyProfile& profile, ViewShim& shim,
                SegmentMap* segments = nullptr);

  const ResizePolicy& policy() const { return policy_; }

  // Runs the periodic check if `now` has reached the next interval boundary.
  std::vector<ResizeAction> tick(SimTime now);
  std::vector<ResizeAction> monitor_and_resize(SimTime now);

  const RuntimeStats& stats() const { return stats_; }

 private:
  void block(std::uint32_t table, SimTime now, SimTime duration);
  void account_table_memory(std::uint32_t table);
  void release_table_memory(std::uint32_t table);

  ResizePolicy policy_;
  LatencyProfile profile_;
  ViewShim& shim_;
  SegmentMap* segments_;
  SimTime next_check_;
  std::map<std::uint32_t, Addr> table_memory_;
  RuntimeStats stats_;
};

}  // namespace gfam
