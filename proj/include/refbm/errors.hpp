#pragma once

#include <stdexcept>
#include <string>

namespace refbm {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A formula needs a Pickands/Piterbarg constant that has no closed form
/// and no Monte Carlo estimate was supplied.
class NeedsEstimatedConstant : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Requested work exceeds a configured budget (grid points, replicates).
class BudgetError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A campaign was refused because the conditioning event is too rare for the
/// requested replicate count.
class TooRareError : public std::runtime_error {
public:
  TooRareError(const std::string& what, double predicted)
      : std::runtime_error(what), predicted_(predicted) {}
  double predicted_acceptance() const noexcept { return predicted_; }

private:
  double predicted_;
};

/// Sampling could not be carried out exactly (e.g. covariance not factorable).
class SamplingError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace refbm
