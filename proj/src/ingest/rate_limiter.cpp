#include <algorithm>
#include <thread>

#include "skg/core/error.hpp"
#include "skg/ingest/clock.hpp"

namespace skg::ingest {

Duration SystemClock::now() const {
  return std::chrono::duration_cast<Duration>(std::chrono::steady_clock::now().time_since_epoch());
}

void SystemClock::sleep_until(Duration t) {
  auto d = t - now();
  if (d > Duration::zero()) std::this_thread::sleep_for(d);
}

Duration ManualClock::now() const {
  std::lock_guard lock(mu_);
  return now_;
}

Timestamp ManualClock::wall() const {
  std::lock_guard lock(mu_);
  return Timestamp{epoch_.millis + std::chrono::duration_cast<std::chrono::milliseconds>(now_).count()};
}

void ManualClock::sleep_until(Duration t) {
  std::lock_guard lock(mu_);
  now_ = std::max(now_, t);
}

void ManualClock::advance(Duration d) {
  std::lock_guard lock(mu_);
  now_ += d;
}

RateLimiter::RateLimiter(Clock& clock, double per_second) : clock_(clock) {
  if (!(per_second > 0)) throw Error(ErrorCode::ValidationError, "rate limit must be positive");
  interval_ = std::chrono::duration_cast<Duration>(std::chrono::duration<double>(1.0 / per_second));
}

Duration RateLimiter::acquire() {
  Duration slot;
  {
    std::lock_guard lock(mu_);
    Duration now = clock_.now();
    slot = started_ ? std::max(now, next_) : now;
    started_ = true;
    next_ = slot + interval_;
  }
  clock_.sleep_until(slot);
  return slot;
}

}  // namespace skg::ingest
