#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <mutex>
#include <optional>
#include <stdexcept>

namespace drowsy {

/// Bounded FIFO between one producer and one consumer.
///
/// close() is the producer's end-of-stream: pops drain what is left and then
/// return nullopt. cancel() is the consumer's abort: blocked and future
/// pushes fail immediately so the producer can stop.
template <typename T>
class BoundedChannel {
 public:
  explicit BoundedChannel(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("channel capacity must be >= 1");
  }

  BoundedChannel(const BoundedChannel&) = delete;
  BoundedChannel& operator=(const BoundedChannel&) = delete;

  /// Blocks while full. False if the channel was closed or cancelled.
  bool push(T value) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return items_.size() < capacity_ || closed_ || cancelled_; });
    if (closed_ || cancelled_) return false;
    items_.push_back(std::move(value));
    high_watermark_ = std::max(high_watermark_, items_.size());
    not_empty_.notify_one();
    return true;
  }

  /// Never blocks; evicts the oldest item when full. Returns how many items
  /// were evicted, or nullopt if the channel was closed or cancelled.
  std::optional<std::size_t> push_evicting(T value) {
    std::lock_guard lock(mu_);
    if (closed_ || cancelled_) return std::nullopt;
    std::size_t evicted = 0;
    while (items_.size() >= capacity_) {
      items_.pop_front();
      ++evicted;
    }
    items_.push_back(std::move(value));
    high_watermark_ = std::max(high_watermark_, items_.size());
    not_empty_.notify_one();
    return evicted;
  }

  /// Blocks until an item arrives or the channel is closed and empty.
  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
    return take(lock);
  }

  std::optional<T> try_pop() {
    std::unique_lock lock(mu_);
    return take(lock);
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  void cancel() {
    std::lock_guard lock(mu_);
    cancelled_ = true;
    not_full_.notify_all();
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return items_.size();
  }

  std::size_t capacity() const noexcept { return capacity_; }

  std::size_t high_watermark() const {
    std::lock_guard lock(mu_);
    return high_watermark_;
  }

 private:
  std::optional<T> take(std::unique_lock<std::mutex>&) {
    if (items_.empty()) return std::nullopt;
    T value = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return value;
  }

  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<T> items_;
  std::size_t high_watermark_ = 0;
  bool closed_ = false;
  bool cancelled_ = false;
};

}  // namespace drowsy
