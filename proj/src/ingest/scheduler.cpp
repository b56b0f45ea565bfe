#include "skg/ingest/scheduler.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "skg/core/error.hpp"

namespace skg::ingest {

Scheduler::Scheduler(Clock& clock, std::uint64_t seed) : clock_(clock), seed_(seed) {}

Scheduler::~Scheduler() {
  stop();
  drain();
}

void Scheduler::add(const std::string& source_id, Duration period, Task task) {
  std::lock_guard lock(mu_);
  if (period <= Duration::zero()) throw Error(ErrorCode::ValidationError, "period must be positive");
  for (const auto& e : entries_) {
    if (e->id == source_id) throw Error(ErrorCode::ValidationError, "duplicate source id '" + source_id + "'");
  }
  auto e = std::make_unique<Entry>();
  e->id = source_id;
  e->period = period;
  e->task = std::move(task);
  e->rng.seed(seed_ + entries_.size());
  if (started_) e->next_due = due_time(*e, 1);
  entries_.push_back(std::move(e));
}

Duration Scheduler::due_time(Entry& e, std::int64_t index) {
  std::int64_t half = e.period.count() / 20;  // 5% of period
  std::uniform_int_distribution<std::int64_t> jitter(-half, half);
  return start_ + e.period * index + Duration(jitter(e.rng));
}

void Scheduler::start() {
  std::lock_guard lock(mu_);
  start_ = clock_.now();
  started_ = true;
  for (auto& e : entries_) {
    e->next_index = 1;
    e->next_due = due_time(*e, 1);
  }
}

void Scheduler::record(const std::string& id, ScheduleEvent ev, std::string msg) {
  std::lock_guard lock(mu_);
  history_.push_back({id, clock_.now(), ev, std::move(msg)});
}

std::size_t Scheduler::poll() {
  if (!started_) start();
  std::size_t launched = 0;
  Duration now = clock_.now();
  for (auto& ep : entries_) {
    Entry& e = *ep;
    std::size_t runs = 0;
    while (e.next_due <= now) {
      ++runs;
      ++e.next_index;
      e.next_due = due_time(e, e.next_index);
    }
    if (runs == 0) continue;
    bool busy;
    {
      std::lock_guard lock(mu_);
      busy = e.running;
      if (!busy) e.running = true;
    }
    if (busy) {
      record(e.id, ScheduleEvent::SkippedBusy, std::to_string(runs) + " tick(s) skipped, previous run active");
      continue;
    }
    if (e.thread.joinable()) e.thread.join();
    launched += runs;
    e.thread = std::thread([this, &e, runs] {
      for (std::size_t r = 0; r < runs; ++r) {
        record(e.id, ScheduleEvent::Run, "");
        try {
          e.task();
        } catch (const std::exception& ex) {
          spdlog::warn("source {}: task failed, restarting on next tick: {}", e.id, ex.what());
          record(e.id, ScheduleEvent::Restart, ex.what());
        } catch (...) {
          record(e.id, ScheduleEvent::Restart, "unknown failure");
        }
      }
      std::lock_guard lock(mu_);
      e.running = false;
    });
  }
  return launched;
}

void Scheduler::drain() {
  for (auto& e : entries_) {
    if (e->thread.joinable()) e->thread.join();
  }
}

void Scheduler::run(Duration quantum) {
  if (!started_) start();
  while (!stop_) {
    poll();
    clock_.sleep_for(quantum);
  }
  drain();
}

void Scheduler::stop() { stop_ = true; }

std::vector<ScheduleRecord> Scheduler::history() const {
  std::lock_guard lock(mu_);
  return history_;
}

std::size_t Scheduler::count(const std::string& source_id, ScheduleEvent event) const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(std::count_if(history_.begin(), history_.end(), [&](const ScheduleRecord& r) {
    return r.source_id == source_id && r.event == event;
  }));
}

double throughput_report(std::size_t reports, Duration window) {
  if (window < std::chrono::seconds(10)) {
    throw Error(ErrorCode::WindowTooShort, "throughput window must cover at least 10 s");
  }
  double minutes = std::chrono::duration<double>(window).count() / 60.0;
  return static_cast<double>(reports) / minutes;
}

}  // namespace skg::ingest
