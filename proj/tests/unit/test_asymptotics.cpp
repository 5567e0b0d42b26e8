#include <doctest.h>

#include <cmath>
#include <numbers>

#include "refbm/asymptotics.hpp"
#include "refbm/constants.hpp"
#include "refbm/errors.hpp"

using namespace refbm;

TEST_CASE("standard normal helpers") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_sf(1.959963984540054) == doctest::Approx(0.025).epsilon(1e-10));
  CHECK(normal_cdf(-1.0) + normal_sf(-1.0) == doctest::Approx(1.0));
  CHECK(std::log(normal_sf(5.0)) == doctest::Approx(log_normal_sf(5.0)).epsilon(1e-10));
  // Mills ratio series at x = 40
  const double x = 40.0;
  const double series = -0.5 * x * x - std::log(x * std::sqrt(2.0 * std::numbers::pi)) +
                        std::log(1.0 - 1.0 / (x * x) + 3.0 / std::pow(x, 4));
  CHECK(log_normal_sf(x) == doctest::Approx(series).epsilon(1e-9));
  CHECK(std::isfinite(log_normal_sf(1e3)));
  CHECK(joint_limit_cdf(0.3, -0.2) == doctest::Approx(normal_cdf(-0.2)));
  CHECK(limit_cdf_tau(1.0) == doctest::Approx(normal_cdf(1.0)));
}

TEST_CASE("normalizers at H = 1/2, c = 1, gamma = 1/2, u = 4") {
  const ModelParams p{0.5, 0.5, 1.0};
  const auto s = scaling(p, 4.0);
  CHECK(s.t_tilde0 == doctest::Approx(1.0));
  CHECK(s.a_of_u == doctest::Approx(2.0));
  CHECK(sigma_max(p) == doctest::Approx(0.5));
  CHECK(s.u_tilde == doctest::Approx(4.0));
}

TEST_CASE("variance maximum sits at (0, t_tilde0)") {
  for (double h : {0.3, 0.5, 0.7})
    for (double c : {0.5, 2.0}) {
      const ModelParams p{h, 0.4, c};
      const double t0 = t_tilde0(p);
      const double top = var_y(0.0, t0, p);
      CHECK(top == doctest::Approx(std::pow(h, h) * std::pow(1 - h, 1 - h) / std::pow(c, h)));
      CHECK(sigma_max(p) == doctest::Approx(top));
      for (double dt : {-0.05, 0.05}) CHECK(var_y(0.0, t0 + dt * t0, p) < top);
      CHECK(var_y(0.01 * t0, t0, p) < top);
    }
}

TEST_CASE("local expansions match exact quantities near the maximum") {
  for (double h : {0.3, 0.5, 0.7}) {
    const ModelParams p{h, 0.5, 1.0};
    const double t0 = t_tilde0(p);
    const double sig = sigma_max(p);
    const double dt = 1e-4;
    const double ds = std::pow(1e-4, 1.0 / (2.0 * h));  // ds^{2H} = 1e-4

    const double exact_t = 1.0 - var_y(0.0, t0 - dt, p) / sig;
    CHECK(exact_t / var_expansion(0.0, t0 - dt, p) == doctest::Approx(1.0).epsilon(0.01));
    const double exact_s = 1.0 - var_y(ds, t0, p) / sig;
    CHECK(exact_s / var_expansion(ds, t0, p) == doctest::Approx(1.0).epsilon(0.01));

    const double corr_t = 1.0 - y_correlation(0.0, t0, 0.0, t0 + dt, p);
    CHECK(corr_t / corr_expansion(0.0, 0.0, t0, t0 + dt, p) == doctest::Approx(1.0).epsilon(0.01));
    const double corr_s = 1.0 - y_correlation(0.0, t0, ds, t0, p);
    CHECK(corr_s / corr_expansion(0.0, ds, t0, t0, p) == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_CASE("ruin approximation at H = 1/2 approaches the reduced form") {
  const ModelParams p{0.5, 0.5, 1.0};
  const auto r = ruin_prob_approx(50.0, p);
  CHECK(r.pickands.value == doctest::Approx(1.0));
  CHECK(r.piterbarg.value == doctest::Approx(2.0));
  CHECK(r.pickands.method == EstimateMethod::closed_form);
  CHECK(std::exp(r.log_value - std::log(ruin_prob_half_reduced(50.0, p))) ==
        doctest::Approx(1.0).epsilon(0.01));
  CHECK(ruin_prob_half_reduced(2.0, p) == doctest::Approx(2.0 * std::exp(-4.0)));
  const auto tiny = ruin_prob_approx(0.01, p);
  CHECK(tiny.value <= 1.0);
  CHECK(tiny.clamped == (tiny.log_value > 0.0));
}

TEST_CASE("ruin approximation needs supplied constants off the closed forms") {
  const ModelParams p{0.3, 0.5, 1.0};
  CHECK_THROWS_AS(ruin_prob_approx(4.0, p), NeedsEstimatedConstant);
  const EstimateWithError h{1.3, 0.05, 1000, EstimateMethod::monte_carlo};
  const EstimateWithError q{1.8, 0.05, 1000, EstimateMethod::monte_carlo};
  CHECK_THROWS_AS(ruin_prob_approx(4.0, p, h), NeedsEstimatedConstant);
  const auto r = ruin_prob_approx(4.0, p, h, q);
  CHECK(r.value > 0.0);
  CHECK(r.std_error > 0.0);
  // linear in the constants
  const auto r2 = ruin_prob_approx(4.0, p, EstimateWithError{2.6, 0.0, 1000, EstimateMethod::monte_carlo}, q);
  CHECK(r2.value == doctest::Approx(2.0 * r.value));
}

TEST_CASE("shrinking regions and the field sup asymptotic") {
  const FieldSpec spec;
  const double u = std::exp(1.0);
  CHECK(delta2(u) == doctest::Approx(1.0 / u));
  CHECK(delta1(u, 2.0) == doctest::Approx(1.0 / u));
  CHECK(delta1(u, 1.0) == doctest::Approx(1.0 / (u * u)));
  const auto [first, second] = delta_regions(u, 0.5, spec);
  CHECK(first.s_hi == doctest::Approx(delta1(u, 2.0)));
  CHECK(first.t_lo == doctest::Approx(1.0 - 1.0 / u));
  CHECK(first.t_hi == doctest::Approx(1.0 + 0.5 / u));
  CHECK(second.t_lo == doctest::Approx(first.t_hi));
  CHECK(second.t_hi == doctest::Approx(1.0 + 1.0 / u));
  CHECK_THROWS_AS(delta_regions(u, 1.5, spec), DomainError);
  CHECK_THROWS_AS(delta_regions(1.0, 0.0, spec), DomainError);

  // sqrt(pi) * P_2^1 * H_2 * Psi(u) / 2 with H_2 = 1/sqrt(pi)
  const auto e = field_sup_asymptotic(3.0, 0.0, spec, RegionSide::first);
  CHECK(e.value == doctest::Approx(0.5 * 0.5 * (1.0 + std::sqrt(2.0)) * normal_sf(3.0)));
  const auto lim = field_sup_asymptotic(3.0, 0.0, spec, RegionSide::first, {}, true);
  CHECK(lim.value == doctest::Approx(2.0 * e.value));
  const auto other = field_sup_asymptotic(3.0, 0.0, spec, RegionSide::second);
  CHECK(other.value == doctest::Approx(e.value));

  FieldSpec rough = spec;
  rough.beta = 1.5;
  CHECK_THROWS_AS(field_sup_asymptotic(3.0, 0.0, rough, RegionSide::first), NeedsEstimatedConstant);
  FieldSpec bad = spec;
  bad.b3 = 0.5;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}
