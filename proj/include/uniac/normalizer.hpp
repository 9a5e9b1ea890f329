#pragma once

#include <span>
#include <vector>

namespace uniac {

// Running observation standardization (Welford). Stats update on insertion
// and are applied as constants, so training stays a pure function of the data
// stream.
class ObsNormalizer {
 public:
  explicit ObsNormalizer(std::size_t dim, bool enabled);

  void observe(std::span<const double> obs);
  std::vector<double> apply(std::span<const double> obs) const;
  void apply_in_place(std::vector<double>& obs) const;
  bool enabled() const { return enabled_; }

 private:
  bool enabled_;
  std::size_t dim_;
  std::size_t count_ = 0;
  std::vector<double> mean_, m2_;
};

}  // namespace uniac
