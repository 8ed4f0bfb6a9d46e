#pragma once

#include <bitset>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gfam/cachesim.hpp"
#include "gfam/dram.hpp"
#include "gfam/simcore.hpp"
#include "gfam/viewshim.hpp"

namespace gfam {

enum class SyncOp : std::uint8_t { GSync, Wd };

struct WorkQueueElement {
  bool valid = false;
  SyncOp op = SyncOp::GSync;
  Addr line = 0;
  std::uint64_t seq = 0;
};

// Circular work queue plus a one-cacheline completion bit vector.
class QueuePair {
 public:
  static constexpr std::uint32_t kCompletionBits = kLineSize * 8;

  explicit QueuePair(std::uint32_t depth = 256);

  std::uint32_t depth() const { return static_cast<std::uint32_t>(ring_.size()); }
  std::uint32_t free_slots() const;
  std::uint64_t outstanding() const { return outstanding_; }

  // Throws BackpressureError when the ring or the completion vector cannot take them all.
  std::vector<std::uint64_t> post(SyncOp op, std::span<const Addr> lines);
  // Endpoint side: takes the head element once its valid bit is observed.
  std::optional<WorkQueueElement> consume();
  void complete(std::uint64_t seq) { done_.set(seq % kCompletionBits); }
  bool ready(std::span<const std::uint64_t> seqs) const;
  // Host side: clears the bits so their positions can be reused.
  void acknowledge(std::span<const std::uint64_t> seqs);

  const std::bitset<kCompletionBits>& completion() const { return done_; }

 private:
  std::vector<WorkQueueElement> ring_;
  std::uint64_t head_ = 0;  // next element the endpoint consumes
  std::uint64_t tail_ = 0;  // next sequence id the host posts
  std::uint64_t outstanding_ = 0;
  std::bitset<kCompletionBits> done_;
};

struct SyncStats {
  std::uint64_t gsync_count = 0;
  std::uint64_t wd_count = 0;
  std::uint64_t batches = 0;
  std::uint64_t polls = 0;
  std::uint64_t peer_bi_sent = 0;           // BIs sent to peers on a VBF hit
  std::uint64_t peer_invalidations = 0;     // peer BIs that found the line cached
  std::uint64_t peer_vms_invalidations = 0; // peer overflowed views dropped
  std::uint64_t self_bi = 0;
  std::uint64_t bus_bytes = 0;
  std::uint64_t merge_on_chip = 0;
  std::uint64_t merge_vms = 0;
  std::uint64_t merge_none = 0;
  std::uint64_t backpressure_events = 0;
};

// Endpoint side of GSync/Wd. Lines are absolute ctxnl-segment addresses.
class SyncEngine {
 public:
  SyncEngine(const LatencyProfile& profile, std::uint32_t queue_depth, std::vector<NodeCache>& caches,
             ViewShim& shim, Dram& dram);

  QueuePair& queue(NodeId node) { return queues_.at(node); }

  Breakdown execute_gsync(NodeId requester, Addr line);
  Breakdown execute_wd(NodeId requester, Addr line);
  // Executes every posted element of the node's queue and sets completion
  // bits. Cost is the slowest element plus the pipeline cost of the rest.
  Breakdown drain(NodeId node);
  // Host-side costs of one post and one completion poll.
  Breakdown post_cost() const;
  Breakdown poll_cost() const;
  void count_poll() { ++stats_.polls; }
  void count_backpressure() { ++stats_.backpressure_events; }

  const SyncStats& stats() const { return stats_; }

 private:
  std::uint64_t offset(Addr line) const { return line % dram_.capacity(); }
  std::uint64_t line_index(Addr line) const { return offset(line) / kLineSize; }

  LatencyProfile profile_;
  std::vector<NodeCache>& caches_;
  ViewShim& shim_;
  Dram& dram_;
  std::vector<QueuePair> queues_;
  SyncStats stats_;
};

}  // namespace gfam
