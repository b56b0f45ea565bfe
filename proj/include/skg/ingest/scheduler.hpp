#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "skg/ingest/clock.hpp"

namespace skg::ingest {

enum class ScheduleEvent { Run, Restart, SkippedBusy };

struct ScheduleRecord {
  std::string source_id;
  Duration at{0};  // clock time the event was recorded
  ScheduleEvent event = ScheduleEvent::Run;
  std::string message;
};

/// Periodic runner for per-source tasks. Source k's n-th run is due at
/// start + n * period + jitter, n >= 1, with jitter drawn uniformly from
/// [-5%, +5%] of the period by a seeded generator. Each poll launches every
/// source with due runs on its own thread; missed ticks are caught up in
/// order. A task that throws gets a Restart record and simply runs again on
/// its next tick.
class Scheduler {
 public:
  using Task = std::function<void()>;

  Scheduler(Clock& clock, std::uint64_t seed = 1);
  ~Scheduler();

  Scheduler(const Scheduler&) = delete;
  Scheduler& operator=(const Scheduler&) = delete;

  /// Throws ValidationError for a duplicate id or non-positive period.
  void add(const std::string& source_id, Duration period, Task task);

  /// Anchors the schedule at the current clock time.
  void start();
  /// Launches due work; returns the number of runs launched.
  std::size_t poll();
  /// Waits for all launched runs to finish.
  void drain();

  /// Polls every `quantum` on the clock until stop() is called, then drains.
  void run(Duration quantum);
  void stop();

  std::vector<ScheduleRecord> history() const;
  std::size_t count(const std::string& source_id, ScheduleEvent event) const;

 private:
  struct Entry {
    std::string id;
    Duration period;
    Task task;
    std::int64_t next_index = 1;
    Duration next_due{0};
    std::mt19937_64 rng;
    bool running = false;
    std::thread thread;
  };

  Duration due_time(Entry& e, std::int64_t index);
  void record(const std::string& id, ScheduleEvent ev, std::string msg);

  Clock& clock_;
  std::uint64_t seed_;
  Duration start_{0};
  bool started_ = false;
  std::vector<std::unique_ptr<Entry>> entries_;
  mutable std::mutex mu_;
  std::vector<ScheduleRecord> history_;
  std::atomic<bool> stop_{false};
};

/// Reports per minute over `window`. Throws WindowTooShort below 10 s.
double throughput_report(std::size_t reports, Duration window);

}  // namespace skg::ingest
