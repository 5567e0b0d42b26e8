#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "refbm/estimate.hpp"
#include "refbm/random.hpp"

namespace refbm {

/// H_1 = 1, H_2 = 1/sqrt(pi); no other closed forms.
std::optional<double> pickands_closed(double alpha);
/// P_1^a = 1 + 1/a, P_2^a = (1 + sqrt(1 + 1/a)) / 2.
std::optional<double> piterbarg_closed(double alpha, double a);

struct McBudget {
  std::size_t replicates = 40000;
  /// Coarse grid intervals across the estimation interval.
  std::size_t grid_intervals = 4096;
  Seed seed = 1;
  unsigned threads = 0;
  /// Also evaluate every path on a grid of half the step (common random
  /// numbers) and extrapolate in the step.
  bool halve_step = true;
  /// Exponent cap for exp(sup ...) contributions.
  double cap = 30.0;
  /// Upper bound on replicates x lattice points.
  double max_work = 4e10;
};

/// alpha in (0,2]; Piterbarg weight a (absent for Pickands); interval [lo, hi].
struct ConstantSpec {
  double alpha = 1.0;
  std::optional<double> a;
  double lo = 0.0;
  double hi = 1.0;
  McBudget mc;

  void validate() const;
};

struct TruncatedEstimate {
  /// Headline value: step-extrapolated when mc.halve_step, fine-grid otherwise.
  EstimateWithError estimate;
  EstimateWithError fine;    ///< grid step `grid_step / 2` (or `grid_step` without halving)
  EstimateWithError coarse;  ///< grid step `grid_step`
  double grid_step = 0.0;
  std::size_t cap_hits = 0;
  ConstantSpec spec;
};

/// Order p of the grid bias E(h) ~ E0 - K h^p used for step extrapolation.
double discretization_order(double alpha);

/// H_alpha[lo,hi] = E exp(sup (sqrt2 B_alpha(t) - |t|^alpha)).
TruncatedEstimate pickands_truncated(const ConstantSpec& spec);
/// P_alpha^a[lo,hi] = E exp(sup (sqrt2 B_alpha(t) - (1+a)|t|^alpha)).
TruncatedEstimate piterbarg_truncated(const ConstantSpec& spec);

/// Truncated constants over [0, T] for each T in a ladder, all from the same
/// paths (common random numbers), so each estimate is pathwise monotone in T.
std::vector<TruncatedEstimate> truncated_ladder(double alpha, std::optional<double> a,
                                                const std::vector<double>& t_ladder,
                                                const McBudget& mc);

struct LimitEstimate {
  /// Intercept of the fit H[0,T]/T = H + kappa/T; std_error combines the
  /// Monte Carlo error of the intercept with the extrapolation spread.
  EstimateWithError estimate;
  double mc_std_error = 0.0;
  double extrapolation_spread = 0.0;
  double kappa = 0.0;
  std::vector<double> t_ladder;
  std::vector<TruncatedEstimate> ladder;  ///< H[0,T] per rung
};

/// Default T ladder for the limit fit at a given alpha.
std::vector<double> default_pickands_ladder(double alpha);
/// Default Monte Carlo budget for the limit fit at a given alpha.
McBudget default_limit_budget(double alpha);

LimitEstimate pickands_limit_estimate(double alpha, const std::vector<double>& t_ladder,
                                      const McBudget& mc);

struct ExceedanceRow {
  double u = 0.0;
  EstimateWithError estimate;  ///< P(sup > u) / Psi(u)
  double probability = 0.0;
  std::size_t exceedances = 0;
  bool unstable = false;       ///< fewer than 50 exceedances
};

/// Independent estimator of H_alpha[0,T]: a stationary Gaussian process with
/// correlation exp(-|t|^alpha) on [0, u^{-2/alpha} T] (grid of
/// mc.grid_intervals intervals), P(sup > u) / Psi(u).
std::vector<ExceedanceRow> pickands_via_exceedance(double alpha, double t,
                                                   const std::vector<double>& u_ladder,
                                                   const McBudget& mc);

nlohmann::json to_json(const TruncatedEstimate& e);
nlohmann::json to_json(const LimitEstimate& e);

} // namespace refbm
