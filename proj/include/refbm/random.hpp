#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace refbm {

using Seed = std::uint64_t;

/// Derives an independent stream seed from a master seed and a path of
/// stream indices (e.g. {level, replicate}). Pure function of its inputs.
Seed derive_seed(Seed master, std::initializer_list<std::uint64_t> path);

/// Standard normal variates from a 64-bit Mersenne twister seeded through
/// std::seed_seq. One instance per replicate stream.
class NormalStream {
public:
  explicit NormalStream(Seed seed);

  double next() { return normal_(engine_); }
  void fill(std::span<double> out);

private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace refbm
