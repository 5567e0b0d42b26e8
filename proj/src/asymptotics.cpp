#include "refbm/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <fmt/format.h>

#include "refbm/constants.hpp"
#include "refbm/errors.hpp"

namespace refbm {

std::string to_string(EstimateMethod m) {
  return m == EstimateMethod::closed_form ? "closed-form" : "monte-carlo";
}

// --- standard normal -------------------------------------------------------

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double log_normal_sf(double x) {
  if (x <= 8.0) return std::log(normal_sf(x));
  // Psi(x) = phi(x) / (x + 1/(x + 2/(x + 3/(x + ...)))), modified Lentz.
  constexpr double tiny = 1e-300;
  double f = x;
  double c = x;
  double d = 0.0;
  for (int k = 1; k < 200; ++k) {
    const double a = static_cast<double>(k);
    d = x + a * d;
    if (std::abs(d) < tiny) d = tiny;
    c = x + a / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  const double log_phi = -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi);
  return log_phi - std::log(f);
}

double limit_cdf_tau(double x) { return normal_cdf(x); }

double joint_limit_cdf(double x, double y) { return normal_cdf(std::min(x, y)); }

// --- normalizers -----------------------------------------------------------

namespace {

void check_level(double u) {
  if (!(u > 0.0) || !std::isfinite(u)) throw DomainError("level u must be positive");
}

} // namespace

double t_tilde0(const ModelParams& p) {
  p.validate();
  return p.hurst / (p.drift * (1.0 - p.hurst));
}

double a_scale(const ModelParams& p, double u) {
  p.validate();
  check_level(u);
  const double h = p.hurst;
  return std::pow(h, h + 0.5) * std::pow(u, h) /
         (std::pow(1.0 - h, h + 0.5) * std::pow(p.drift, h + 1.0));
}

double a_const(const ModelParams& p) {
  p.validate();
  return std::sqrt(p.hurst) / (p.drift * std::pow(1.0 - p.hurst, 1.5));
}

double sigma_max(const ModelParams& p) {
  p.validate();
  const double h = p.hurst;
  return std::pow(h, h) * std::pow(1.0 - h, 1.0 - h) / std::pow(p.drift, h);
}

double u_tilde(const ModelParams& p, double u) {
  check_level(u);
  return std::pow(u, 1.0 - p.hurst) / sigma_max(p);
}

ScalingParams scaling(const ModelParams& p, double u) {
  return {u, t_tilde0(p), a_scale(p, u), u_tilde(p, u), a_const(p)};
}

// --- variance geometry -----------------------------------------------------

double var_y(double s, double t, const ModelParams& p) {
  p.validate();
  if (s < 0.0 || s > t) throw DomainError("var_y needs 0 <= s <= t");
  const double h2 = 2.0 * p.hurst;
  const double g = p.gamma;
  const double num = (1.0 - g) * std::pow(t, h2) + (g * g - g) * std::pow(s, h2) +
                     g * std::pow(t - s, h2);
  const double den = 1.0 + p.drift * t - p.drift * g * s;
  return std::sqrt(std::max(num, 0.0)) / den;
}

double var_expansion(double s, double t, const ModelParams& p) {
  p.validate();
  const double h = p.hurst;
  const double c = p.drift;
  const double g = p.gamma;
  const double t0 = t_tilde0(p);
  const double lead_t = c * c * std::pow(1.0 - h, 3) / (2.0 * h);
  const double lead_s = (g - g * g) * std::pow(1.0 - h, 2.0 * h) * std::pow(c, 2.0 * h) /
                        (2.0 * std::pow(h, 2.0 * h));
  const double dt = h <= 0.5 ? (t0 - t) : (t0 - t + g * s);
  return lead_t * dt * dt + lead_s * std::pow(s, 2.0 * h);
}

double y_covariance(double s, double t, double s2, double t2, const ModelParams& p) {
  p.validate();
  const double h = p.hurst;
  const double g = p.gamma;
  const double num = fbm_cov(t, t2, h) - g * fbm_cov(t, s2, h) - g * fbm_cov(s, t2, h) +
                     g * g * fbm_cov(s, s2, h);
  return num / ((1.0 + p.drift * (t - g * s)) * (1.0 + p.drift * (t2 - g * s2)));
}

double y_correlation(double s, double t, double s2, double t2, const ModelParams& p) {
  return y_covariance(s, t, s2, t2, p) / (var_y(s, t, p) * var_y(s2, t2, p));
}

double corr_expansion(double s, double s2, double t, double t2, const ModelParams& p) {
  p.validate();
  const double h2 = 2.0 * p.hurst;
  const double t0 = t_tilde0(p);
  return (std::pow(std::abs(t - t2), h2) +
          p.gamma * p.gamma * std::pow(std::abs(s - s2), h2)) /
         (2.0 * std::pow(t0, h2));
}

// --- ruin probability ------------------------------------------------------

RuinApproximation ruin_prob_approx(double u, const ModelParams& p,
                                   std::optional<EstimateWithError> pickands_2h,
                                   std::optional<EstimateWithError> piterbarg_2h) {
  p.validate_open_gamma();
  check_level(u);
  const double h = p.hurst;
  const double alpha = 2.0 * h;
  const double weight = (1.0 - p.gamma) / p.gamma;

  RuinApproximation out;
  if (auto closed = pickands_closed(alpha)) {
    out.pickands = EstimateWithError::exact(*closed);
  } else if (pickands_2h) {
    out.pickands = *pickands_2h;
  } else {
    throw NeedsEstimatedConstant(fmt::format(
        "ruin_prob_approx needs an estimate of the Pickands constant H_{:g} (--pickands)", alpha));
  }
  if (auto closed = piterbarg_closed(alpha, weight)) {
    out.piterbarg = EstimateWithError::exact(*closed);
  } else if (piterbarg_2h) {
    out.piterbarg = *piterbarg_2h;
  } else {
    throw NeedsEstimatedConstant(
        fmt::format("ruin_prob_approx needs an estimate of the Piterbarg constant P_{:g}^{:g} "
                    "(--piterbarg)",
                    alpha, weight));
  }

  const double x = u_tilde(p, u);
  const double log_w = (0.5 - 1.0 / (2.0 * h)) * std::log(2.0) +
                       0.5 * std::log(std::numbers::pi) - 0.5 * std::log(h * (1.0 - h)) +
                       std::log(out.pickands.value) + std::log(out.piterbarg.value) +
                       (1.0 / h - 1.0) * std::log(x);
  out.log_value = log_w + log_normal_sf(x);
  const double raw = std::exp(out.log_value);
  out.clamped = raw > 1.0;
  out.value = std::min(raw, 1.0);
  const double rel = std::hypot(out.pickands.relative_error(), out.piterbarg.relative_error());
  out.std_error = out.value * rel;
  return out;
}

double ruin_prob_half_reduced(double u, const ModelParams& p) {
  p.validate_open_gamma();
  check_level(u);
  if (p.hurst != 0.5) throw DomainError("the exp(-2cu)/(1-gamma) reduction needs H = 1/2");
  return std::exp(-2.0 * p.drift * u) / (1.0 - p.gamma);
}

// --- field asymptotics ------------------------------------------------------

void FieldSpec::validate() const {
  if (!(beta > 0.0 && beta <= 2.0) || beta == 1.0)
    throw DomainError("beta must lie in (0,1) or (1,2], got " + std::to_string(beta));
  if (!(b1 > 0.0)) throw DomainError("b1 must be positive");
  if (!(b2 > 0.0)) throw DomainError("b2 must be positive");
  if (!(a1 > 0.0)) throw DomainError("a1 must be positive");
  if (!(a2 > 0.0)) throw DomainError("a2 must be positive");
  if (!(b2 + b3 / 2.0 > 0.0)) throw DomainError("need b2 + b3/2 > 0");
  if (b3 != 0.0 && !(beta > 1.0 && beta < 2.0))
    throw DomainError("b3 != 0 is only supported for beta in (1,2)");
  if (!(t0 > 0.0)) throw DomainError("t0 must be an interior (positive) point");
}

double delta1(double u, double beta) { return std::pow(std::log(u) / u, 2.0 / beta); }

double delta2(double u) { return std::log(u) / u; }

std::pair<Rect, Rect> delta_regions(double u, double x, const FieldSpec& spec) {
  spec.validate();
  if (!(u > 1.0)) throw DomainError("delta regions need u > 1");
  const double d1 = delta1(u, spec.beta);
  const double d2 = delta2(u);
  const double edge = spec.t0 + x / u;
  if (edge < spec.t0 - d2) throw DomainError("first delta region is empty (x < -ln u)");
  if (edge > spec.t0 + d2) throw DomainError("second delta region is empty (x > ln u)");
  Rect first{0.0, d1, spec.t0 - d2, edge};
  Rect second{0.0, d1, edge, spec.t0 + d2};
  return {first, second};
}

EstimateWithError field_sup_asymptotic(double u, double x, const FieldSpec& spec,
                                       RegionSide side, const FieldConstants& constants,
                                       bool limit_side_factor) {
  spec.validate();
  check_level(u);
  const double beta = spec.beta;
  EstimateWithError piter;
  EstimateWithError pick;
  if (auto closed = piterbarg_closed(beta, spec.b1 / spec.a1)) {
    piter = EstimateWithError::exact(*closed);
  } else if (constants.piterbarg) {
    piter = *constants.piterbarg;
  } else {
    throw NeedsEstimatedConstant("field_sup_asymptotic needs an estimate of P_beta^{b1/a1}");
  }
  if (auto closed = pickands_closed(beta)) {
    pick = EstimateWithError::exact(*closed);
  } else if (constants.pickands) {
    pick = *constants.pickands;
  } else {
    throw NeedsEstimatedConstant("field_sup_asymptotic needs an estimate of H_beta");
  }

  const double z = std::sqrt(2.0 * spec.b2) * x;
  double side_factor = 1.0;
  if (!limit_side_factor) side_factor = side == RegionSide::first ? normal_cdf(z) : normal_sf(z);

  const double value = std::sqrt(std::numbers::pi / spec.b2) * std::pow(spec.a2, 1.0 / beta) *
                       piter.value * pick.value * std::pow(u, 2.0 / beta - 1.0) *
                       normal_sf(u) * side_factor;
  const double rel = std::hypot(piter.relative_error(), pick.relative_error());
  const bool mc = piter.method == EstimateMethod::monte_carlo ||
                  pick.method == EstimateMethod::monte_carlo;
  return {value, value * rel, 0, mc ? EstimateMethod::monte_carlo : EstimateMethod::closed_form};
}

} // namespace refbm
