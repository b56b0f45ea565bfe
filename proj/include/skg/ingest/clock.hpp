#pragma once

#include <chrono>
#include <mutex>

#include "skg/core/types.hpp"

namespace skg::ingest {

using Duration = std::chrono::nanoseconds;

/// Time source for fetching and scheduling. `now()` is monotonic time
/// since an arbitrary origin.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Duration now() const = 0;
  virtual Timestamp wall() const = 0;
  virtual void sleep_until(Duration t) = 0;
  void sleep_for(Duration d) { sleep_until(now() + d); }
};

class SystemClock final : public Clock {
 public:
  Duration now() const override;
  Timestamp wall() const override { return now_utc(); }
  void sleep_until(Duration t) override;
};

/// Virtual time for tests. `sleep_until` advances the clock to the target
/// instead of blocking, so rate limits and backoff are measured in virtual
/// time. Wall time is a fixed epoch plus virtual time.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Timestamp epoch = Timestamp{1700000000000}) : epoch_(epoch) {}

  Duration now() const override;
  Timestamp wall() const override;
  void sleep_until(Duration t) override;
  void advance(Duration d);

 private:
  mutable std::mutex mu_;
  Duration now_{0};
  Timestamp epoch_;
};

/// Spaces acquisitions at least 1/rate apart on the given clock. The first
/// acquisition is immediate. Thread-safe.
class RateLimiter {
 public:
  RateLimiter(Clock& clock, double per_second);
  /// Blocks (on the clock) until the caller's slot; returns the slot time.
  Duration acquire();

 private:
  Clock& clock_;
  Duration interval_;
  std::mutex mu_;
  bool started_ = false;
  Duration next_{0};
};

}  // namespace skg::ingest
