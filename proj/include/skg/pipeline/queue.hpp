#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <mutex>
#include <optional>

namespace skg::pipeline {

/// Multi-producer multi-consumer queue bounded by in-flight items: an item
/// counts from push until the consumer calls task_done(). Producers block
/// while the bound is reached. pop() returns nullopt once closed and empty.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

  void push(T item) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return in_flight_ < capacity_; });
    items_.push_back(std::move(item));
    ++in_flight_;
    if (in_flight_ > high_water_) high_water_ = in_flight_;
    not_empty_.notify_one();
  }

  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    return item;
  }

  void task_done() {
    std::lock_guard lock(mu_);
    if (in_flight_ > 0) --in_flight_;
    not_full_.notify_one();
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t high_water() const {
    std::lock_guard lock(mu_);
    return high_water_;
  }
  std::size_t in_flight() const {
    std::lock_guard lock(mu_);
    return in_flight_;
  }

 private:
  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<T> items_;
  std::size_t in_flight_ = 0;
  std::size_t high_water_ = 0;
  bool closed_ = false;
};

}  // namespace skg::pipeline
