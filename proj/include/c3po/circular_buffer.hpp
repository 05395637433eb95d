#pragma once

#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "c3po/errors.hpp"

namespace c3po {

// Fixed-capacity ring of the k most recent samples. push() writes at
// write_index() and advances it modulo k; filled() turns true on the first
// wrap and stays true.
template <typename T>
class CircularBuffer {
 public:
  explicit CircularBuffer(std::size_t capacity) : slots_(capacity) {
    if (capacity == 0) throw ConfigError("circular buffer capacity must be > 0");
  }

  std::size_t capacity() const { return slots_.size(); }
  std::size_t write_index() const { return write_index_; }
  bool filled() const { return filled_; }
  std::size_t size() const { return filled_ ? slots_.size() : write_index_; }

  // Returns true if this write wrapped the index back to 0.
  bool push(const T& value) {
    slots_[write_index_] = value;
    write_index_ = (write_index_ + 1) % slots_.size();
    if (write_index_ == 0) {
      filled_ = true;
      return true;
    }
    return false;
  }

  const T& operator[](std::size_t slot) const { return slots_[slot]; }

  // Raw slots in storage order; only the first size() are meaningful before
  // the first wrap.
  std::span<const T> slots() const { return slots_; }

  // Index of the oldest stored sample (valid when size() > 0).
  std::size_t oldest_index() const { return filled_ ? write_index_ : 0; }
  // Index of the most recent sample (valid when size() > 0).
  std::size_t newest_index() const {
    return (write_index_ + slots_.size() - 1) % slots_.size();
  }

  T mean() const {
    const std::size_t n = size();
    if (n == 0) return T{};
    const auto live = std::span<const T>(slots_).first(n);
    return std::accumulate(live.begin(), live.end(), T{}) / static_cast<T>(n);
  }

 private:
  std::vector<T> slots_;
  std::size_t write_index_ = 0;
  bool filled_ = false;
};

}  // namespace c3po
