#pragma once

// Experience replay with half-buffer eviction: once full, each insert first
// removes a uniformly chosen element from the oldest half, so recently added
// items always survive long enough to be sampled.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "execq/error.hpp"
#include "execq/features.hpp"

namespace execq {

template <class T>
class ReplayMemory {
 public:
  struct Eviction {
    std::size_t position;    // age rank at eviction time (0 = oldest)
    std::uint64_t sequence;  // insertion number of the evicted item
  };

  ReplayMemory(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {
    if (capacity == 0) throw ArgumentError("replay capacity must be positive");
    slots_.reserve(capacity);
    order_.reserve(capacity);
  }

  std::optional<Eviction> push(T item) {
    std::optional<Eviction> ev;
    if (order_.size() == capacity_) {
      const std::size_t half = std::max<std::size_t>(capacity_ / 2, 1);
      std::uniform_int_distribution<std::size_t> pick(0, half - 1);
      const std::size_t pos = pick(rng_);
      const std::uint32_t slot = order_[pos];
      ev = Eviction{pos, slots_[slot].sequence};
      order_.erase(order_.begin() + static_cast<std::ptrdiff_t>(pos));
      slots_[slot] = Entry{std::move(item), inserted_++};
      order_.push_back(slot);
    } else {
      slots_.push_back(Entry{std::move(item), inserted_++});
      order_.push_back(static_cast<std::uint32_t>(slots_.size() - 1));
    }
    return ev;
  }

  /// `n` independent uniform draws with replacement.
  template <class Rng>
  std::vector<const T*> sample(std::size_t n, Rng& rng) const {
    if (order_.empty()) throw StateError("cannot sample from an empty replay memory");
    std::uniform_int_distribution<std::size_t> pick(0, order_.size() - 1);
    std::vector<const T*> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(&slots_[order_[pick(rng)]].item);
    return out;
  }

  std::size_t size() const noexcept { return order_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool empty() const noexcept { return order_.empty(); }
  std::uint64_t inserted() const noexcept { return inserted_; }

  /// Item by age rank, 0 = oldest.
  const T& at(std::size_t position) const { return slots_[order_.at(position)].item; }
  std::uint64_t sequence_at(std::size_t position) const { return slots_[order_.at(position)].sequence; }

 private:
  struct Entry {
    T item;
    std::uint64_t sequence;
  };

  std::size_t capacity_;
  std::vector<Entry> slots_;
  std::vector<std::uint32_t> order_;  // slot indices, oldest first
  std::uint64_t inserted_ = 0;
  std::mt19937_64 rng_;
};

/// Time tag of a transition's next state.
enum class NextTag : std::uint8_t {
  none,         // unset; rejected when building targets
  interior,     // next state is an ordinary decision time
  penultimate,  // next state is the final decision time T_{N-1}
  terminal,     // next state is the horizon end T_N
};

struct Transition {
  RawState state;
  int action = 0;
  double reward = 0.0;  // includes terminal liquidation for terminal-tagged items
  RawState next;
  NextTag tag = NextTag::none;
  double terminal_value = 0.0;  // forced liquidation value of `next` (penultimate only)
};

using ReplayBuffer = ReplayMemory<Transition>;

}  // namespace execq
