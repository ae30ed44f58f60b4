#include "tod/net/scheduler.hpp"

#include <chrono>

namespace tod::net {

struct PeriodicTask::State {
  TimeNs period;
  std::function<void(TimeNs)> fn;
  bool cancelled = false;
};

PeriodicTask::PeriodicTask(Scheduler& sched, TimeNs first_ns, TimeNs period_ns, std::function<void(TimeNs)> fn)
    : sched_(sched), period_(period_ns), state_(std::make_shared<State>(State{period_ns, std::move(fn)})) {
  arm(sched_, state_, first_ns);
}

PeriodicTask::~PeriodicTask() { cancel(); }

void PeriodicTask::cancel() {
  if (state_) state_->cancelled = true;
}

void PeriodicTask::arm(Scheduler& sched, std::shared_ptr<State> state, TimeNs t) {
  sched.at(t, [&sched, state, t] {
    if (state->cancelled) return;
    // Re-arm first so events scheduled by the callback at t + period run after it.
    arm(sched, state, t + state->period);
    state->fn(t);
  });
}

void VirtualScheduler::at(TimeNs t_ns, std::function<void()> fn) {
  queue_.push(Event{t_ns < now_ ? now_ : t_ns, next_order_++, std::move(fn)});
}

bool VirtualScheduler::run_next() {
  if (queue_.empty()) return false;
  Event ev = queue_.top();
  queue_.pop();
  now_ = ev.t;
  ev.fn();
  return true;
}

void VirtualScheduler::run_until(TimeNs t_ns) {
  while (!queue_.empty() && queue_.top().t <= t_ns) run_next();
  if (now_ < t_ns) now_ = t_ns;
}

namespace {
std::int64_t steady_now() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}
}  // namespace

RealTimeScheduler::RealTimeScheduler() : epoch_(steady_now()) {}

TimeNs RealTimeScheduler::now_ns() const { return steady_now() - epoch_; }

void RealTimeScheduler::at(TimeNs t_ns, std::function<void()> fn) {
  {
    std::lock_guard lock(mu_);
    queue_.push(Event{t_ns, next_order_++, std::move(fn)});
  }
  cv_.notify_one();
}

void RealTimeScheduler::stop() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
}

void RealTimeScheduler::run_until(TimeNs t_ns) {
  std::unique_lock lock(mu_);
  while (!stop_) {
    const TimeNs now = now_ns();
    if (now >= t_ns) break;
    if (!queue_.empty() && queue_.top().t <= now) {
      Event ev = queue_.top();
      queue_.pop();
      lock.unlock();
      ev.fn();
      lock.lock();
      continue;
    }
    const TimeNs wake = queue_.empty() ? t_ns : std::min(t_ns, queue_.top().t);
    cv_.wait_for(lock, std::chrono::nanoseconds(wake - now));
  }
}

}  // namespace tod::net
