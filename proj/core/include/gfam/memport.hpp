#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "gfam/fabric.hpp"
#include "gfam/scheduler.hpp"

namespace gfam {

// A simulated worker's view of the fabric. Each shared-memory operation is
// an awaitable: the worker yields, runs the operation once it is the earliest
// worker, and is charged the operation's latency.
class MemPort {
 public:
  MemPort(Fabric& fabric, Scheduler& sched, std::size_t slot)
      : fabric_(fabric), sched_(sched), slot_(slot), node_(sched.id(slot).node) {}

  NodeId node() const { return node_; }
  std::size_t slot() const { return slot_; }
  SimTime now() const { return sched_.clock().now(slot_); }
  Fabric& fabric() { return fabric_; }
  const Breakdown& spent() const { return spent_; }

  // Node-local work; advances the clock without yielding.
  void compute(SimTime ns) { sched_.clock().charge(slot_, ns); }

  auto load(Addr a, std::span<std::uint8_t> out) {
    return sched_.at_turn(slot_, [this, a, out] { return charge(fabric_.load(node_, a, out, now())); });
  }
  auto store(Addr a, std::span<const std::uint8_t> in) {
    return sched_.at_turn(slot_, [this, a, in] { return charge(fabric_.store(node_, a, in, now())); });
  }
  auto load_u64(Addr a) {
    return sched_.at_turn(slot_, [this, a] {
      std::array<std::uint8_t, 8> b{};
      charge(fabric_.load(node_, a, b, now()));
      return gfam::load_u64(b.data());
    });
  }
  auto store_u64(Addr a, std::uint64_t v) {
    return sched_.at_turn(slot_, [this, a, v] {
      std::array<std::uint8_t, 8> b{};
      gfam::store_u64(b.data(), v);
      return charge(fabric_.store(node_, a, b, now()));
    });
  }
  auto cas(Addr a, std::uint64_t expect, std::uint64_t desired) {
    return sched_.at_turn(slot_, [this, a, expect, desired] {
      RmwResult r = fabric_.cas(node_, a, expect, desired, now());
      charge(r.cost);
      return r;
    });
  }
  auto faa(Addr a, std::uint64_t delta) {
    return sched_.at_turn(slot_, [this, a, delta] {
      RmwResult r = fabric_.faa(node_, a, delta, now());
      charge(r.cost);
      return r;
    });
  }
  auto l_load(Addr a, std::span<std::uint8_t> out) {
    return sched_.at_turn(slot_, [this, a, out] { return charge(fabric_.l_load(node_, a, out, now())); });
  }
  auto l_store(Addr a, std::span<const std::uint8_t> in) {
    return sched_.at_turn(slot_, [this, a, in] { return charge(fabric_.l_store(node_, a, in, now())); });
  }
  auto gsync(std::span<const Addr> lines) {
    return sched_.at_turn(slot_, [this, lines] { return charge(fabric_.gsync(node_, lines, now())); });
  }
  auto wd(std::span<const Addr> lines) {
    return sched_.at_turn(slot_, [this, lines] { return charge(fabric_.wd(node_, lines, now())); });
  }

 private:
  Breakdown charge(const Breakdown& b) {
    spent_ += b;
    sched_.clock().charge(slot_, b.total());
    return b;
  }

  Fabric& fabric_;
  Scheduler& sched_;
  std::size_t slot_;
  NodeId node_;
  Breakdown spent_;
};

}  // namespace gfam
