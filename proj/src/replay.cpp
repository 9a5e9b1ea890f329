#include "uniac/replay.hpp"

#include <algorithm>
#include <cmath>

namespace uniac {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ContractViolation("ReplayBuffer: zero capacity");
}

void ReplayBuffer::push(Transition t) {
  t.validate();
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(std::move(t));
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n,
                                                      Rng& rng) const {
  if (items_.empty()) throw ContractViolation("ReplayBuffer: sampling empty buffer");
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = rng.uniform_index(items_.size());
  return out;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n,
                                                    Rng& rng) const {
  std::vector<const Transition*> out(n);
  for (auto& p : out) p = &items_[rng.uniform_index(items_.size())];
  return out;
}

std::vector<ReplayBuffer::Segment> ReplayBuffer::episode_segments() const {
  std::vector<Segment> out;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const bool fresh = out.empty() ||
                       items_[i].episode_id != items_[out.back().last].episode_id ||
                       items_[i].step_index != items_[out.back().last].step_index + 1;
    if (fresh) out.push_back({i, i});
    else out.back().last = i;
  }
  return out;
}

Trajectory ReplayBuffer::segment_trajectory(const Segment& seg) const {
  Trajectory t;
  t.steps.reserve(seg.last - seg.first + 1);
  for (std::size_t i = seg.first; i <= seg.last; ++i) t.steps.push_back(items_[i]);
  return t;
}

ObsNormalizer::ObsNormalizer(std::size_t dim, bool enabled)
    : enabled_(enabled), dim_(dim), mean_(dim, 0.0), m2_(dim, 0.0) {}

void ObsNormalizer::observe(std::span<const double> obs) {
  if (!enabled_) return;
  ++count_;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double d = obs[i] - mean_[i];
    mean_[i] += d / double(count_);
    m2_[i] += d * (obs[i] - mean_[i]);
  }
}

std::vector<double> ObsNormalizer::apply(std::span<const double> obs) const {
  std::vector<double> out(obs.begin(), obs.end());
  apply_in_place(out);
  return out;
}

void ObsNormalizer::apply_in_place(std::vector<double>& obs) const {
  if (!enabled_ || count_ < 2) return;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double var = m2_[i] / double(count_);
    const double sd = std::sqrt(var);
    double v = (obs[i] - mean_[i]) / (sd > 1e-6 ? sd : 1e-6);
    obs[i] = std::min(std::max(v, -10.0), 10.0);
  }
}

}  // namespace uniac
