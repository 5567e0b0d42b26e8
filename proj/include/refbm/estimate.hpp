#pragma once

#include <cstddef>
#include <string>

namespace refbm {

enum class EstimateMethod { closed_form, monte_carlo };

/// A point value with its standard error. Closed-form values carry zero error.
struct EstimateWithError {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t replicates = 0;
  EstimateMethod method = EstimateMethod::closed_form;

  static EstimateWithError exact(double v) { return {v, 0.0, 0, EstimateMethod::closed_form}; }
  double relative_error() const { return value != 0.0 ? std_error / value : 0.0; }
};

std::string to_string(EstimateMethod m);

} // namespace refbm
