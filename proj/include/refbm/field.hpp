#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "refbm/asymptotics.hpp"
#include "refbm/fbm.hpp"
#include "refbm/random.hpp"

namespace refbm {

inline constexpr std::size_t kDefaultFieldBudget = 4096;

/// Product grid s_points x t_points.
struct FieldGrid {
  std::vector<double> s_points;
  std::vector<double> t_points;

  std::size_t size() const { return s_points.size() * t_points.size(); }
  /// Nonempty, strictly ascending axes and at most `budget` points.
  void validate(std::size_t budget = kDefaultFieldBudget) const;

  /// Points lo, lo + step, ... not exceeding hi (plus a 1e-9 relative slack).
  static std::vector<double> axis(double lo, double hi, double step);
};

/// Values indexed [i * |t| + j] for (s_i, t_j). NaN marks points outside the
/// domain of the field.
struct FieldSample {
  FieldGrid grid;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const { return values[i * grid.t_points.size() + j]; }
};

/// Max over grid points inside `region`. Throws DomainError when the region
/// holds no valid grid point.
double sup_over_region(const FieldSample& sample, const Rect& region);
double sup_over_region(const FieldGrid& grid, std::span<const double> values,
                       const Rect& region);

/// Y(s,t) = (X_H(t) - gamma X_H(s)) / (1 + c(t - gamma s)) built from one fBm
/// path evaluated at the union of the axis points. The fBm covariance is
/// factored once at construction.
class YFieldSampler {
public:
  YFieldSampler(const ModelParams& params, FieldGrid grid,
                std::size_t budget = kDefaultFieldBudget);

  const FieldGrid& grid() const { return grid_; }
  FieldSample sample(Seed seed) const;
  void sample_into(NormalStream& normals, std::span<double> out) const;

private:
  ModelParams params_;
  FieldGrid grid_;
  std::vector<double> points_;      // union of positive axis values
  std::vector<double> chol_;        // row-major lower factor
  std::vector<std::size_t> s_idx_;  // index into points_ + 1 (0 = origin)
  std::vector<std::size_t> t_idx_;
};

FieldSample sample_y_field(const ModelParams& params, const FieldGrid& grid, Seed seed,
                           std::size_t budget = kDefaultFieldBudget);

/// Stationary field xi with Corr = exp(-a_s |ds|^alpha_s - a_t |dt|^alpha_t),
/// divided pointwise by a deterministic weight. The covariance factor is the
/// Kronecker product of two 1-D Cholesky factors and is computed once.
class SeparableFieldSampler {
public:
  struct Kernel {
    double alpha_s = 2.0;
    double a_s = 1.0;
    double alpha_t = 2.0;
    double a_t = 1.0;
  };

  struct Workspace {
    std::vector<double> z;
    std::vector<double> tmp;
  };

  SeparableFieldSampler(FieldGrid grid, Kernel kernel,
                        const std::function<double(double, double)>& weight,
                        std::size_t budget = kDefaultFieldBudget);

  const FieldGrid& grid() const { return grid_; }
  const std::vector<double>& weights() const { return weights_; }
  /// Largest diagonal jitter that was needed by either axis factor.
  double jitter() const { return std::max(jitter_s_, jitter_t_); }

  Workspace make_workspace() const;
  /// Draws xi into `out` (row-major |s| x |t|).
  void sample_xi(NormalStream& normals, Workspace& ws, std::span<double> out) const;
  /// Draws xi / weight into `out`.
  void sample_into(NormalStream& normals, Workspace& ws, std::span<double> out) const;

  FieldSample sample_xi(Seed seed) const;
  FieldSample sample(Seed seed) const;

private:
  FieldGrid grid_;
  std::vector<double> chol_s_;
  std::vector<double> chol_t_;
  std::vector<double> weights_;
  double jitter_s_ = 0.0;
  double jitter_t_ = 0.0;
};

/// xi-tilde(s,t) = xi(s,t) / ((1 + b1 s^beta)(1 + b2 |t-t0|^2 + b3 |t-t0| s)).
SeparableFieldSampler make_canonical_sampler(const FieldSpec& spec, FieldGrid grid,
                                             std::size_t budget = kDefaultFieldBudget);
FieldSample sample_canonical_field(const FieldSpec& spec, const FieldGrid& grid, Seed seed,
                                   std::size_t budget = kDefaultFieldBudget);

struct FieldMc {
  std::size_t replicates = 200000;
  Seed seed = 1;
  unsigned threads = 0;
  double points_per_cell = 8.0;
  std::size_t budget = kDefaultFieldBudget;
};

struct Thm21Row {
  double u = 0.0;
  double empirical_p = 0.0;  ///< first side, fine grid
  double std_error = 0.0;
  double predicted_p = 0.0;
  double ratio = 0.0;
  double coarse_p = 0.0;     ///< first side, every other grid point per axis
  double second_p = 0.0;
  double second_predicted_p = 0.0;
  double union_p = 0.0;
  double grid_step = 0.0;    ///< fine step in both axes
  std::size_t points = 0;
  bool infeasible = false;
};

struct Thm21Report {
  FieldSpec spec;
  double x = 0.0;
  bool limit_mode = false;  ///< x(u) = ln u with the side factor replaced by 1
  std::size_t replicates = 0;
  Seed seed = 0;
  std::vector<Thm21Row> rows;
  std::vector<std::string> warnings;
};

/// Monte Carlo of P(sup of the canonical field over each Delta region > u)
/// against field_sup_asymptotic. In limit mode x is replaced by ln u, so the
/// first region spans the whole union and its side factor is 1.
Thm21Report verify_thm21(const FieldSpec& spec, double x, const std::vector<double>& u_ladder,
                         const FieldMc& mc, const FieldConstants& constants = {},
                         bool limit_mode = false);

/// P(sup over Delta^1_x(u) > u) for several x from the same paths.
std::vector<double> first_side_curve(const FieldSpec& spec, double u,
                                     const std::vector<double>& xs, const FieldMc& mc);

struct PiterbargLemmaSetup {
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double b1 = 0.5;
  double b2 = 1.0;
  double s_len = 2.0;
  double t_lo = 0.0;
  double t_hi = 2.0;
  /// Step of the scaled lattice (in units of u^{-2/alpha}).
  double scaled_step = 0.125;
  bool shifted_level = false;  ///< g(u) = u + 1/u instead of u
  /// Replicates and seed for the right-hand constants.
  std::size_t constant_replicates = 200000;
};

struct PiterbargRow {
  double u = 0.0;
  double level = 0.0;  ///< g(u)
  double empirical_p = 0.0;
  double std_error = 0.0;
  double predicted_p = 0.0;
  double predicted_std_error = 0.0;
  double ratio = 0.0;
  double z_score = 0.0;  ///< (empirical - predicted) / combined SE
  std::size_t points = 0;
  bool infeasible = false;
};

struct PiterbargReport {
  PiterbargLemmaSetup setup;
  EstimateWithError s_constant;  ///< P^{b1}_{alpha1}[0,S], or H_{alpha1}[0,S] when b1 = 0
  EstimateWithError t_constant;  ///< P^{b2}_{alpha2}[T1,T2]
  bool pickands_substituted = false;
  std::vector<PiterbargRow> rows;
  std::vector<std::string> warnings;
};

/// Field Monte Carlo of the left side of the Piterbarg-type lemma over
/// [0, u^{-2/a1} S] x [u^{-2/a2} T1, u^{-2/a2} T2] with weight
/// (1 + b1 s^a1)(1 + b2 |t|^a2), against the product of truncated constants
/// times Psi(g(u)). Both sides use the same scaled lattice.
PiterbargReport verify_piterbarg_lemma(const PiterbargLemmaSetup& setup,
                                       const std::vector<double>& u_ladder, const FieldMc& mc);

nlohmann::json to_json(const FieldSpec& spec);
nlohmann::json to_json(const Thm21Report& report);
nlohmann::json to_json(const PiterbargReport& report);

} // namespace refbm
