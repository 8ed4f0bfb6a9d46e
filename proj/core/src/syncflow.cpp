#include "gfam/syncflow.hpp"

#include <cmath>
#include <string>

#include "gfam/error.hpp"

namespace gfam {

QueuePair::QueuePair(std::uint32_t depth) : ring_(depth) {
  if (depth == 0 || depth > kCompletionBits)
    throw ConfigError("sync.queue_depth: must be in [1, " + std::to_string(kCompletionBits) + "]");
}

std::uint32_t QueuePair::free_slots() const {
  std::uint64_t used = tail_ - head_;
  std::uint64_t by_ring = ring_.size() - used;
  std::uint64_t by_bits = kCompletionBits - outstanding_;
  return static_cast<std::uint32_t>(std::min(by_ring, by_bits));
}

std::vector<std::uint64_t> QueuePair::post(SyncOp op, std::span<const Addr> lines) {
  if (lines.size() > free_slots())
    throw BackpressureError("work queue full: " + std::to_string(lines.size()) + " posts, " +
                            std::to_string(free_slots()) + " free");
  std::vector<std::uint64_t> seqs;
  seqs.reserve(lines.size());
  for (Addr l : lines) {
    if (!is_line_aligned(l)) throw AlignmentError("sync post of unaligned line");
    std::uint64_t seq = tail_++;
    ring_[seq % ring_.size()] = WorkQueueElement{true, op, l, seq};
    done_.reset(seq % kCompletionBits);
    ++outstanding_;
    seqs.push_back(seq);
  }
  return seqs;
}

std::optional<WorkQueueElement> QueuePair::consume() {
  if (head_ == tail_) return std::nullopt;
  WorkQueueElement& e = ring_[head_ % ring_.size()];
  if (!e.valid) return std::nullopt;
  WorkQueueElement out = e;
  e.valid = false;
  ++head_;
  return out;
}

bool QueuePair::ready(std::span<const std::uint64_t> seqs) const {
  for (auto s : seqs)
    if (!done_.test(s % kCompletionBits)) return false;
  return true;
}

void QueuePair::acknowledge(std::span<const std::uint64_t> seqs) {
  for (auto s : seqs) {
    if (done_.test(s % kCompletionBits) && outstanding_ > 0) --outstanding_;
    done_.reset(s % kCompletionBits);
  }
}

SyncEngine::SyncEngine(const LatencyProfile& profile, std::uint32_t queue_depth,
                       std::vector<NodeCache>& caches, ViewShim& shim, Dram& dram)
    : profile_(profile), caches_(caches), shim_(shim), dram_(dram) {
  for (std::size_t n = 0; n < caches_.size(); ++n) queues_.emplace_back(queue_depth);
}

Breakdown SyncEngine::post_cost() const {
  Breakdown b;
  b.dram = profile_.link_rt_ns;
  return b;
}

Breakdown SyncEngine::poll_cost() const {
  Breakdown b;
  b.dram = profile_.c2m_ns;
  return b;
}

Breakdown SyncEngine::execute_gsync(NodeId req, Addr line) {
  ++stats_.gsync_count;
  const std::uint64_t li = line_index(line);
  Breakdown cost;
  // address-only broadcast on the snoop bus
  constexpr std::uint64_t kProbeBytes = 8;
  stats_.bus_bytes += kProbeBytes;
  cost.ep_logic += profile_.ep_logic_ns +
                   static_cast<SimTime>(std::ceil(static_cast<double>(kProbeBytes) / profile_.bus_bytes_per_ns));

  // Phase 1: peers drop their views. Peers work in parallel; the slowest one counts.
  Breakdown slowest_peer;
  for (NodeId p = 0; p < caches_.size(); ++p) {
    if (p == req) continue;
    Breakdown pc;
    std::uint32_t probes = 0;
    if (shim_.vat_invalidate(p, li, &probes)) ++stats_.peer_vms_invalidations;
    pc.dram += probes * profile_.dram_ns;
    if (shim_.vbf_query(p, li)) {
      ++stats_.peer_bi_sent;
      pc.sf_bi += profile_.c2c_ns;
      auto r = caches_[p].invalidate(line);
      // a dirty peer copy is an unsynchronized view; its bytes are discarded
      if (r.kind != InvalidateKind::Absent) {
        ++stats_.peer_invalidations;
        shim_.vbf_update(p, li, VbfAction::RemoveOnWriteback);
      }
    }
    if (pc.total() > slowest_peer.total()) slowest_peer = pc;
  }
  cost += slowest_peer;

  // Phase 2: merge the requester's view into EMS.
  bool merged = false;
  if (shim_.vbf_query(req, li)) {
    ++stats_.self_bi;
    cost.sf_bi += profile_.link_rt_ns;
    auto r = caches_[req].invalidate(line);
    if (r.kind != InvalidateKind::Absent) shim_.vbf_update(req, li, VbfAction::RemoveOnWriteback);
    if (r.kind == InvalidateKind::WasModified) {
      dram_.write_line(offset(line), r.data);
      cost.dram += profile_.dram_ns;
      std::uint32_t probes = 0;
      shim_.vat_invalidate(req, li, &probes);  // the on-chip view supersedes any overflowed one
      cost.dram += probes * profile_.dram_ns;
      ++stats_.merge_on_chip;
      merged = true;
    }
  }
  if (!merged) {
    std::uint32_t probes = 0;
    std::optional<LineData> view;
    if (shim_.vf_query(req, li)) {
      view = shim_.peek_view(req, li);
      if (view) shim_.vat_invalidate(req, li, &probes);
    }
    cost.dram += probes * profile_.dram_ns;
    if (view) {
      dram_.write_line(offset(line), *view);
      cost.dram += 2 * profile_.dram_ns;
      ++stats_.merge_vms;
    } else {
      ++stats_.merge_none;
    }
  }
  return cost;
}

Breakdown SyncEngine::execute_wd(NodeId req, Addr line) {
  ++stats_.wd_count;
  const std::uint64_t li = line_index(line);
  Breakdown cost;
  cost.ep_logic += profile_.ep_logic_ns;
  if (shim_.vbf_query(req, li)) {
    ++stats_.self_bi;
    cost.sf_bi += profile_.link_rt_ns;
    auto r = caches_[req].invalidate(line);
    if (r.kind != InvalidateKind::Absent) shim_.vbf_update(req, li, VbfAction::RemoveOnWriteback);
  }
  std::uint32_t probes = 0;
  shim_.vat_invalidate(req, li, &probes);
  cost.dram += probes * profile_.dram_ns;
  return cost;
}

Breakdown SyncEngine::drain(NodeId node) {
  QueuePair& q = queues_.at(node);
  Breakdown slowest;
  std::uint64_t n = 0;
  while (auto e = q.consume()) {
    Breakdown c = e->op == SyncOp::GSync ? execute_gsync(node, e->line) : execute_wd(node, e->line);
    q.complete(e->seq);
    if (c.total() > slowest.total()) slowest = c;
    ++n;
  }
  if (n == 0) return slowest;
  ++stats_.batches;
  slowest.ep_logic += (n - 1) * profile_.ep_logic_ns;
  return slowest;
}

}  // namespace gfam
