#pragma once

#include <optional>
#include <string>
#include <utility>

#include "refbm/estimate.hpp"
#include "refbm/fbm.hpp"

namespace refbm {

// --- standard normal -------------------------------------------------------

/// Phi(x).
double normal_cdf(double x);
/// Psi(x) = 1 - Phi(x), accurate in the far right tail.
double normal_sf(double x);
/// log Psi(x); a continued fraction is used for x > 8 so the result stays
/// finite long after Psi itself underflows.
double log_normal_sf(double x);

/// Limit law of both standardized passage times: Phi(x).
double limit_cdf_tau(double x);
/// Limit joint law of the standardized pair: Phi(min(x, y)).
double joint_limit_cdf(double x, double y);

// --- normalizers -----------------------------------------------------------

struct ScalingParams {
  double u = 0.0;
  double t_tilde0 = 0.0;
  double a_of_u = 0.0;
  double u_tilde = 0.0;
  double a_const = 0.0;
};

/// H / (c (1-H)).
double t_tilde0(const ModelParams& params);
/// H^{H+1/2} u^H / ((1-H)^{H+1/2} c^{H+1}).
double a_scale(const ModelParams& params, double u);
/// H^{1/2} / (c (1-H)^{3/2}).
double a_const(const ModelParams& params);
/// u^{1-H} / sigma_max.
double u_tilde(const ModelParams& params, double u);
ScalingParams scaling(const ModelParams& params, double u);

// --- variance geometry of Y(s,t) = (X(t) - gamma X(s)) / (1 + c(t - gamma s)) ---

/// Standard deviation V_Y(s,t), 0 <= s <= t.
double var_y(double s, double t, const ModelParams& params);
/// V_Y(0, t_tilde0) = H^H (1-H)^{1-H} / c^H.
double sigma_max(const ModelParams& params);
/// Leading-order value of 1 - V_Y(s,t)/sigma_max near (0, t_tilde0). H = 1/2
/// takes the H <= 1/2 branch.
double var_expansion(double s, double t, const ModelParams& params);
/// Cov(Y(s,t), Y(s2,t2)) from the fBm covariance.
double y_covariance(double s, double t, double s2, double t2, const ModelParams& params);
/// Exact correlation of Y between (s,t) and (s2,t2).
double y_correlation(double s, double t, double s2, double t2, const ModelParams& params);
/// Leading-order value of 1 - Corr near (0, t_tilde0):
/// (|t-t2|^{2H} + gamma^2 |s-s2|^{2H}) / (2 t_tilde0^{2H}).
double corr_expansion(double s, double s2, double t, double t2, const ModelParams& params);

// --- ruin probability --------------------------------------------------------

struct RuinApproximation {
  double value = 0.0;
  double std_error = 0.0;  ///< propagated from estimated constants
  double log_value = 0.0;  ///< log of the unclamped approximation
  bool clamped = false;    ///< unclamped value exceeded 1
  EstimateWithError pickands;
  EstimateWithError piterbarg;
};

/// Large-u approximation of P(tau_1 < infinity)
///   W_H(u) Psi(u_tilde),  u_tilde = c^H u^{1-H} / (H^H (1-H)^{1-H}),
///   W_H(u) = 2^{1/2 - 1/(2H)} sqrt(pi) / sqrt(H(1-H)) H_{2H} P_{2H}^{(1-g)/g} u_tilde^{1/H-1}.
/// For 2H not in {1,2} the constants must be supplied; otherwise
/// NeedsEstimatedConstant is thrown.
RuinApproximation ruin_prob_approx(double u, const ModelParams& params,
                                   std::optional<EstimateWithError> pickands_2h = std::nullopt,
                                   std::optional<EstimateWithError> piterbarg_2h = std::nullopt);

/// The H = 1/2 reduction of ruin_prob_approx: exp(-2cu) / (1 - gamma).
double ruin_prob_half_reduced(double u, const ModelParams& params);

// --- Gaussian field sup asymptotics -----------------------------------------

/// Local structure of a field with unique variance maximum at (0, t0):
///   sigma = 1 - b1 s^beta - b2 |t-t0|^2 - b3 s |t-t0|,
///   r = 1 - a1 |ds|^beta - a2 |dt|^beta.
struct FieldSpec {
  double beta = 2.0;
  double b1 = 1.0;
  double b2 = 1.0;
  double b3 = 0.0;
  double a1 = 1.0;
  double a2 = 1.0;
  double t0 = 1.0;

  /// beta in (0,1) u (1,2]; b1, b2, a1, a2 > 0; b2 + b3/2 > 0; b3 != 0 only for
  /// beta in (1,2).
  void validate() const;
};

struct Rect {
  double s_lo = 0.0;
  double s_hi = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;

  bool contains(double s, double t, double tol = 1e-12) const {
    return s >= s_lo - tol && s <= s_hi + tol && t >= t_lo - tol && t <= t_hi + tol;
  }
};

/// delta_1(u) = (ln u / u)^{2/beta}, delta_2(u) = ln u / u.
double delta1(double u, double beta);
double delta2(double u);

/// first  = [0, d1] x [t0 - d2, t0 + x/u]
/// second = [0, d1] x [t0 + x/u, t0 + d2]
/// Throws DomainError when u <= 1 or a requested side would be empty.
std::pair<Rect, Rect> delta_regions(double u, double x, const FieldSpec& spec);

enum class RegionSide { first, second };

struct FieldConstants {
  std::optional<EstimateWithError> piterbarg;  ///< P_beta^{b1/a1}
  std::optional<EstimateWithError> pickands;   ///< H_beta
};

/// sqrt(pi/b2) a2^{1/beta} P_beta^{b1/a1} H_beta u^{2/beta-1} Psi(u) times
/// Phi(sqrt(2 b2) x) (first side) or Psi(sqrt(2 b2) x) (second side). With
/// `limit_side_factor` the Phi/Psi factor is replaced by 1.
EstimateWithError field_sup_asymptotic(double u, double x, const FieldSpec& spec,
                                       RegionSide side, const FieldConstants& constants = {},
                                       bool limit_side_factor = false);

} // namespace refbm
