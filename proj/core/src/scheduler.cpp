#include "gfam/scheduler.hpp"

#include <exception>

namespace gfam {

std::size_t Scheduler::add_worker(WorkerId id) {
  workers_.push_back(Worker{id, {}, {}, true});
  clock_ = SimClock(workers_.size());
  return workers_.size() - 1;
}

void Scheduler::spawn(std::size_t slot, Task<void> root) {
  Worker& w = workers_.at(slot);
  w.next = root.handle();
  w.root = std::move(root);
  w.done = false;
}

void Scheduler::run() {
  for (;;) {
    std::size_t best = workers_.size();
    for (std::size_t i = 0; i < workers_.size(); ++i) {
      const Worker& w = workers_[i];
      if (w.done) continue;
      if (best == workers_.size()) {
        best = i;
        continue;
      }
      const Worker& b = workers_[best];
      SimTime ti = clock_.now(i), tb = clock_.now(best);
      if (ti < tb || (ti == tb && w.id < b.id)) best = i;
    }
    if (best == workers_.size()) return;

    Worker& w = workers_[best];
    if (hook_) hook_(clock_.now(best));
    ++steps_;
    auto h = std::exchange(w.next, {});
    h.resume();
    auto root = w.root.handle();
    if (root.done()) {
      w.done = true;
      if (root.promise().error) std::rethrow_exception(root.promise().error);
    }
  }
}

}  // namespace gfam
