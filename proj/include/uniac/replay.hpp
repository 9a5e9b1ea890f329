#pragma once

#include <deque>
#include <vector>

#include "uniac/critic.hpp"
#include "uniac/normalizer.hpp"
#include "uniac/rng.hpp"

namespace uniac {

// FIFO transition store with uniform sampling. Episode ids are preserved so
// contiguous stored segments can be rebuilt for TD(lambda).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return items_[i]; }

  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const;
  std::vector<const Transition*> sample(std::size_t n, Rng& rng) const;

  // Maximal runs of consecutive same-episode transitions currently stored,
  // oldest first, as index ranges [first, last].
  struct Segment {
    std::size_t first = 0;
    std::size_t last = 0;
  };
  std::vector<Segment> episode_segments() const;
  Trajectory segment_trajectory(const Segment& seg) const;

 private:
  std::size_t capacity_;
  std::deque<Transition> items_;
};

}  // namespace uniac
