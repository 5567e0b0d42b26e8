#include "refbm/reflected.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "refbm/errors.hpp"

namespace refbm {

namespace {

void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw DomainError("gamma must lie in [0,1], got " + std::to_string(gamma));
}

void check_level(double level) {
  if (!(level > 0.0)) throw DomainError("passage level must be positive");
}

} // namespace

SamplePath running_infimum(const SamplePath& path) {
  SamplePath out = path;
  double running = std::numeric_limits<double>::infinity();
  for (double& v : out.values) {
    running = std::min(running, v);
    v = running;
  }
  return out;
}

SamplePath reflect(const SamplePath& input, double gamma) {
  check_gamma(gamma);
  if (!input.values.empty() && input.values.front() != 0.0)
    throw DomainError("reflect expects a path starting at 0");
  SamplePath inf = running_infimum(input);
  SamplePath out = input;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = input.values[i] - gamma * inf.values[i];
  return out;
}

PassageRecord passage_times(const SamplePath& w, double level) {
  check_level(level);
  PassageRecord rec;
  rec.level = level;
  const double dt = w.grid.step();
  for (std::size_t i = 0; i < w.values.size(); ++i) {
    if (w.values[i] > level) {
      const double t = static_cast<double>(i) * dt;
      if (!rec.tau1) rec.tau1 = t;
      rec.tau2 = t;
    }
  }
  rec.ruined = rec.tau1.has_value();
  return rec;
}

PassageRecord reflected_passage(std::span<const double> input, double dt, double gamma,
                                double level) {
  check_gamma(gamma);
  check_level(level);
  PassageRecord rec;
  rec.level = level;
  double running = 0.0;
  std::size_t first = input.size();
  std::size_t last = input.size();
  for (std::size_t i = 0; i < input.size(); ++i) {
    running = std::min(running, input[i]);
    if (input[i] - gamma * running > level) {
      if (first == input.size()) first = i;
      last = i;
    }
  }
  if (first != input.size()) {
    rec.tau1 = static_cast<double>(first) * dt;
    rec.tau2 = static_cast<double>(last) * dt;
    rec.ruined = true;
  }
  return rec;
}

PassageRecord reflected_passage(const SamplePath& input, double gamma, double level) {
  return reflected_passage(input.values, input.grid.step(), gamma, level);
}

double reflected_maximum(std::span<const double> input, double gamma) {
  double running = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (double y : input) {
    running = std::min(running, y);
    best = std::max(best, y - gamma * running);
  }
  return best;
}

} // namespace refbm
