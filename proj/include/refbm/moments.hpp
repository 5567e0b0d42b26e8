#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace refbm {

/// Streaming mean and co-moment matrix of a d-dimensional sample (Welford
/// updates, Chan merge). Merging in a fixed order gives bitwise-reproducible
/// results independent of how the work was scheduled.
class MomentAccumulator {
public:
  explicit MomentAccumulator(std::size_t dim = 1);

  void add(std::span<const double> x);
  void add(double x) { add(std::span<const double>(&x, 1)); }
  void merge(const MomentAccumulator& other);

  std::size_t dim() const { return dim_; }
  std::size_t count() const { return count_; }
  double mean(std::size_t i = 0) const { return mean_[i]; }
  /// Unbiased sample covariance.
  double covariance(std::size_t i, std::size_t j) const;
  double variance(std::size_t i = 0) const { return covariance(i, i); }

  /// Mean of the linear functional w.x over the sample.
  double combination_mean(std::span<const double> w) const;
  /// Standard error of that mean.
  double combination_std_error(std::span<const double> w) const;

private:
  std::size_t dim_;
  std::size_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;  // dim x dim, row-major
  std::vector<double> delta_;
};

} // namespace refbm
