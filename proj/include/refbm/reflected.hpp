#pragma once

#include <optional>
#include <span>

#include "refbm/fbm.hpp"

namespace refbm {

/// First/last passage of a path above a level. Times are grid times of the
/// first and last strictly exceeding grid points; absent means "no exceedance
/// within the simulated horizon".
struct PassageRecord {
  std::optional<double> tau1;
  std::optional<double> tau2;
  bool ruined = false;
  double level = 0.0;
};

/// output[i] = min(input[0..i]).
SamplePath running_infimum(const SamplePath& path);

/// W_gamma(t_i) = Y(t_i) - gamma * min_{j <= i} Y(t_j).
SamplePath reflect(const SamplePath& input, double gamma);

PassageRecord passage_times(const SamplePath& w, double level);

/// Single pass computing passage_times(reflect(input, gamma), level) without
/// materializing the reflected path.
PassageRecord reflected_passage(const SamplePath& input, double gamma, double level);

/// Same, on raw values with grid step `dt`; values[0] must be 0.
PassageRecord reflected_passage(std::span<const double> input, double dt, double gamma,
                                double level);

/// max_i W_gamma(t_i); ruin at level u within the horizon iff result > u.
double reflected_maximum(std::span<const double> input, double gamma);

} // namespace refbm
