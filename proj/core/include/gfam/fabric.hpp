#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gfam/cachesim.hpp"
#include "gfam/dram.hpp"
#include "gfam/runtime.hpp"
#include "gfam/simcore.hpp"
#include "gfam/syncflow.hpp"
#include "gfam/vanilla.hpp"
#include "gfam/viewshim.hpp"

namespace gfam {

enum class OpKind : std::uint8_t { Ld, St, LLd, LSt, GSync, Wd, Cas, Faa };
inline constexpr std::size_t kOpKinds = 8;
const char* to_string(OpKind k);

struct FabricConfig {
  std::uint32_t nodes = 8;
  LatencyProfile profile = make_profile(ProfileKind::CxlProto);
  CacheConfig cache;
  SnoopFilterConfig sf;
  ViewShimConfig shim;
  std::uint32_t queue_depth = 256;
  ResizePolicy resize;
  std::uint64_t capacity = std::uint64_t{4} << 30;
  std::uint64_t chunk_bytes = 64 * 1024;
  std::uint64_t seed = 1;

  void validate() const;
};

struct FabricStats {
  std::array<std::uint64_t, kOpKinds> ops{};
  Breakdown vanilla_time;  // G-FAM time spent in the vanilla datapath
  Breakdown ctxnl_time;    // L-Ld/L-St/GSync/Wd time
  SimTime stall_ns = 0;    // time colliding accesses waited on a blocked VAT table
  std::uint64_t forced_resizes = 0;

  Breakdown total() const {
    Breakdown b = vanilla_time;
    b += ctxnl_time;
    return b;
  }
};

// The shared-memory facade: routes each access by segment to the vanilla
// datapath or to the view shim, and runs GSync/Wd through the queue pairs.
class Fabric {
 public:
  explicit Fabric(const FabricConfig& cfg);
  Fabric(const Fabric&) = delete;
  Fabric& operator=(const Fabric&) = delete;

  const FabricConfig& config() const { return cfg_; }
  std::uint32_t nodes() const { return cfg_.nodes; }

  Addr cxl_alloc(NodeId node, std::uint64_t bytes, Primitive p, TrafficClass cls = TrafficClass::Meta);
  Addr hw_alloc(std::uint64_t bytes) { return segments_.hw_alloc(bytes); }
  void hw_free(Addr a) { segments_.hw_free(a); }
  TrafficClass classify(Addr a) const;

  // Vanilla primitives.
  Breakdown load(NodeId node, Addr addr, std::span<std::uint8_t> out, SimTime now = 0);
  Breakdown store(NodeId node, Addr addr, std::span<const std::uint8_t> bytes, SimTime now = 0);
  RmwResult cas(NodeId node, Addr addr, std::uint64_t expect, std::uint64_t desired, SimTime now = 0);
  RmwResult faa(NodeId node, Addr addr, std::uint64_t delta, SimTime now = 0);

  // Loosely coherent primitives.
  Breakdown l_load(NodeId node, Addr addr, std::span<std::uint8_t> out, SimTime now = 0);
  Breakdown l_store(NodeId node, Addr addr, std::span<const std::uint8_t> bytes, SimTime now = 0);
  Breakdown gsync(NodeId node, std::span<const Addr> addrs, SimTime now = 0);
  Breakdown wd(NodeId node, std::span<const Addr> addrs, SimTime now = 0);

  // Direct DRAM access for loaders and checks; bypasses every cache.
  void poke(Addr addr, std::span<const std::uint8_t> bytes);
  void peek_dram(Addr addr, std::span<std::uint8_t> out) const;

  // What `node` would read at `line` right now, without side effects.
  LineData view(NodeId node, Addr line) const;

  // Evicts a line (or every line) from a node cache through the normal victim path.
  void evict(NodeId node, Addr line, SimTime now = 0);
  void evict_all(NodeId node, SimTime now = 0);

  // Periodic resize check; called with the virtual time of each scheduling step.
  void tick(SimTime now);

  // Snoop filter, VAT and VF invariants. Empty string when clean.
  std::string check_invariants() const;

  void set_trace(std::ostream* out) { trace_ = out; }

  SegmentMap& segments() { return segments_; }
  const SegmentMap& segments() const { return segments_; }
  VanillaCoherence& vanilla() { return *vanilla_; }
  const VanillaCoherence& vanilla() const { return *vanilla_; }
  ViewShim& shim() { return *shim_; }
  const ViewShim& shim() const { return *shim_; }
  SyncEngine& sync() { return *sync_; }
  const SyncEngine& sync() const { return *sync_; }
  ResizeMonitor& monitor() { return *monitor_; }
  const ResizeMonitor& monitor() const { return *monitor_; }
  std::vector<NodeCache>& caches() { return caches_; }
  const std::vector<NodeCache>& caches() const { return caches_; }
  Dram& dram() { return dram_; }
  const FabricStats& stats() const { return stats_; }

 private:
  void require(Addr addr, std::size_t len, Segment expected, const char* op) const;
  std::uint64_t line_index(Addr line) const { return segments_.dram_offset(line) / kLineSize; }
  void handle_victim(NodeId node, const CachedLine& victim);
  CachedLine* ctxnl_fill(NodeId node, Addr line, Breakdown& cost);
  SimTime stall_for(NodeId node, Addr line);
  Breakdown sync_batch(NodeId node, SyncOp op, std::span<const Addr> addrs, SimTime now);
  void trace(OpKind k, NodeId node, Addr addr, const Breakdown& cost);

  FabricConfig cfg_;
  Dram dram_;
  SegmentMap segments_;
  std::vector<NodeCache> caches_;
  std::unique_ptr<VanillaCoherence> vanilla_;
  std::unique_ptr<ViewShim> shim_;
  std::unique_ptr<SyncEngine> sync_;
  std::unique_ptr<ResizeMonitor> monitor_;
  std::map<Addr, Addr> record_ranges_;  // start -> end, vanilla segment records
  SimTime now_ = 0;
  FabricStats stats_;
  std::ostream* trace_ = nullptr;
};

}  // namespace gfam
