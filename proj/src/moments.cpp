#include "refbm/moments.hpp"

#include <cmath>

#include "refbm/errors.hpp"

namespace refbm {

MomentAccumulator::MomentAccumulator(std::size_t dim)
    : dim_(dim), mean_(dim, 0.0), m2_(dim * dim, 0.0), delta_(dim, 0.0) {}

void MomentAccumulator::add(std::span<const double> x) {
  if (x.size() != dim_) throw DomainError("moment accumulator dimension mismatch");
  ++count_;
  const double n = static_cast<double>(count_);
  for (std::size_t i = 0; i < dim_; ++i) {
    delta_[i] = x[i] - mean_[i];
    mean_[i] += delta_[i] / n;
  }
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) m2_[i * dim_ + j] += delta_[i] * (x[j] - mean_[j]);
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.dim_ != dim_) throw DomainError("moment accumulator dimension mismatch");
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  for (std::size_t i = 0; i < dim_; ++i) delta_[i] = other.mean_[i] - mean_[i];
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j)
      m2_[i * dim_ + j] += other.m2_[i * dim_ + j] + delta_[i] * delta_[j] * na * nb / n;
  for (std::size_t i = 0; i < dim_; ++i) mean_[i] += delta_[i] * nb / n;
  count_ += other.count_;
}

double MomentAccumulator::covariance(std::size_t i, std::size_t j) const {
  if (count_ < 2) return 0.0;
  return m2_[i * dim_ + j] / static_cast<double>(count_ - 1);
}

double MomentAccumulator::combination_mean(std::span<const double> w) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) acc += w[i] * mean_[i];
  return acc;
}

double MomentAccumulator::combination_std_error(std::span<const double> w) const {
  if (count_ < 2) return 0.0;
  double var = 0.0;
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) var += w[i] * w[j] * covariance(i, j);
  return std::sqrt(std::max(var, 0.0) / static_cast<double>(count_));
}

} // namespace refbm
