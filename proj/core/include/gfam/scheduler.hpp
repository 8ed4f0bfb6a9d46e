#pragma once

#include <coroutine>
#include <cstddef>
#include <functional>
#include <type_traits>
#include <utility>
#include <vector>

#include "gfam/simcore.hpp"
#include "gfam/task.hpp"

namespace gfam {

// Runs worker coroutines in virtual time. A worker suspends at every shared
// memory operation; the scheduler always resumes the worker with the smallest
// (clock, node, worker) key, so operations reach the fabric in timestamp order.
class Scheduler {
 public:
  using StepHook = std::function<void(SimTime)>;

  std::size_t add_worker(WorkerId id);
  void spawn(std::size_t slot, Task<void> root);

  SimClock& clock() { return clock_; }
  const SimClock& clock() const { return clock_; }
  WorkerId id(std::size_t slot) const { return workers_.at(slot).id; }
  std::size_t size() const { return workers_.size(); }

  // Called with the virtual time of each step before the worker resumes.
  void set_step_hook(StepHook hook) { hook_ = std::move(hook); }

  // Drives all spawned workers to completion. Rethrows the first worker error.
  void run();
  std::uint64_t steps() const { return steps_; }

  template <typename F>
  struct OpAwaiter {
    Scheduler* sched;
    std::size_t slot;
    F fn;
    bool await_ready() const noexcept { return false; }
    void await_suspend(std::coroutine_handle<> h) noexcept { sched->workers_[slot].next = h; }
    decltype(auto) await_resume() { return fn(); }
  };

  // Suspends the worker until it is the earliest, then runs `fn` at that instant.
  template <typename F>
  OpAwaiter<std::decay_t<F>> at_turn(std::size_t slot, F&& fn) {
    return OpAwaiter<std::decay_t<F>>{this, slot, std::forward<F>(fn)};
  }
  auto yield(std::size_t slot) {
    return at_turn(slot, [] {});
  }

 private:
  struct Worker {
    WorkerId id;
    Task<void> root;
    std::coroutine_handle<> next;
    bool done = true;
  };

  std::vector<Worker> workers_;
  SimClock clock_;
  StepHook hook_;
  std::uint64_t steps_ = 0;
};

}  // namespace gfam
