#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <queue>
#include <vector>

namespace tod::net {

using TimeNs = std::int64_t;

inline constexpr TimeNs seconds_to_ns(double s) { return static_cast<TimeNs>(s * 1e9 + (s >= 0 ? 0.5 : -0.5)); }
inline constexpr double ns_to_seconds(TimeNs ns) { return static_cast<double>(ns) * 1e-9; }

/// Time source plus a one-shot timer queue. Nodes are written against this
/// interface so the same code runs in virtual time and in real time.
class Scheduler {
 public:
  virtual ~Scheduler() = default;
  virtual TimeNs now_ns() const = 0;
  /// Runs `fn` at `t_ns` (or immediately on the next dispatch if in the past).
  /// Events with equal times run in the order they were scheduled.
  virtual void at(TimeNs t_ns, std::function<void()> fn) = 0;
};

/// Cancellable fixed-rate repetition built on Scheduler::at.
class PeriodicTask {
 public:
  PeriodicTask(Scheduler& sched, TimeNs first_ns, TimeNs period_ns, std::function<void(TimeNs)> fn);
  ~PeriodicTask();
  PeriodicTask(const PeriodicTask&) = delete;
  PeriodicTask& operator=(const PeriodicTask&) = delete;

  void cancel();
  TimeNs period_ns() const noexcept { return period_; }

 private:
  struct State;
  static void arm(Scheduler& sched, std::shared_ptr<State> state, TimeNs t);

  Scheduler& sched_;
  TimeNs period_;
  std::shared_ptr<State> state_;
};

/// Deterministic discrete-event executor. Single-threaded.
class VirtualScheduler final : public Scheduler {
 public:
  explicit VirtualScheduler(TimeNs start_ns = 0) : now_(start_ns) {}

  TimeNs now_ns() const override { return now_; }
  void at(TimeNs t_ns, std::function<void()> fn) override;

  /// Dispatches every event with time <= t_ns, then sets now to t_ns.
  void run_until(TimeNs t_ns);
  bool run_next();
  std::size_t pending() const noexcept { return queue_.size(); }

 private:
  struct Event {
    TimeNs t;
    std::uint64_t order;
    std::function<void()> fn;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.t != b.t ? a.t > b.t : a.order > b.order;
    }
  };

  TimeNs now_;
  std::uint64_t next_order_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
};

/// Wall-clock executor on std::chrono::steady_clock. `at` may be called from
/// any thread; events run on the thread calling run_until/run_forever.
class RealTimeScheduler final : public Scheduler {
 public:
  RealTimeScheduler();

  TimeNs now_ns() const override;
  void at(TimeNs t_ns, std::function<void()> fn) override;

  /// Runs until `t_ns` or until stop() is called.
  void run_until(TimeNs t_ns);
  void stop();

 private:
  struct Event {
    TimeNs t;
    std::uint64_t order;
    std::function<void()> fn;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.t != b.t ? a.t > b.t : a.order > b.order;
    }
  };

  std::int64_t epoch_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::uint64_t next_order_ = 0;
  bool stop_ = false;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
};

}  // namespace tod::net
