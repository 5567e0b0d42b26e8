#include <doctest.h>

#include <cmath>
#include <vector>

#include "refbm/errors.hpp"
#include "refbm/fbm.hpp"
#include "refbm/moments.hpp"
#include "refbm/random.hpp"

using namespace refbm;

TEST_CASE("fbm covariance hand values") {
  CHECK(fbm_cov(1.0, 1.0, 0.3) == doctest::Approx(1.0));
  CHECK(fbm_cov(0.4, 0.9, 0.5) == doctest::Approx(0.4));
  // (1 + 2^1.4 - 1) / 2
  CHECK(fbm_cov(1.0, 2.0, 0.7) == doctest::Approx(0.5 * std::pow(2.0, 1.4)));
  CHECK(fgn_autocov(0, 0.7) == doctest::Approx(1.0));
  CHECK(fgn_autocov(1, 0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fgn_autocov(1, 0.7) == doctest::Approx(0.5 * (std::pow(2.0, 1.4) - 2.0)));
  CHECK_THROWS_AS(fbm_cov(-1.0, 1.0, 0.5), DomainError);
}

TEST_CASE("model parameter validation names the field") {
  ModelParams p{1.2, 0.5, 1.0};
  try {
    p.validate();
    FAIL("no throw");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("hurst") != std::string::npos);
  }
  CHECK_THROWS_AS((ModelParams{0.5, 1.5, 1.0}.validate()), DomainError);
  CHECK_THROWS_AS((ModelParams{0.5, 0.5, 0.0}.validate()), DomainError);
  CHECK_NOTHROW((ModelParams{0.5, 1.0, 1.0}.validate()));
  CHECK_THROWS_AS((ModelParams{0.5, 1.0, 1.0}.validate_open_gamma()), DomainError);
  CHECK_THROWS_AS(Grid(0.0, 4), DomainError);
  CHECK_THROWS_AS(Grid(1.0, 0), DomainError);
}

TEST_CASE("sample paths start at zero and are seed-deterministic") {
  const Grid grid(2.0, 64);
  const auto a = sample_fbm(0.3, grid, 11);
  const auto b = sample_fbm(0.3, grid, 11);
  const auto c = sample_fbm(0.3, grid, 12);
  CHECK(a.values.size() == grid.size());
  CHECK(a.values.front() == 0.0);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);

  const ModelParams p{0.7, 0.5, 2.0};
  const auto y = sample_drifted_input(p, grid, 11);
  const auto x = sample_fbm(0.7, grid, 11);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(y.values[i] == doctest::Approx(x.values[i] - 2.0 * grid.time(i)));
}

namespace {

// Max |empirical - exact| covariance over a small lattice.
double covariance_misfit(double hurst, long k_lo, long k_hi, double step, std::size_t pairs) {
  const FbmSampler sampler(hurst, step, k_lo, k_hi);
  const std::size_t n = sampler.size();
  MomentAccumulator m(n);
  auto ws = sampler.make_workspace();
  std::vector<double> a(n), b(n);
  for (std::size_t p = 0; p < pairs; ++p) {
    NormalStream normals(derive_seed(5, {p}));
    sampler.sample_pair(normals, ws, a, b);
    m.add(a);
    m.add(b);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double s = static_cast<double>(k_lo + static_cast<long>(i)) * step;
      const double t = static_cast<double>(k_lo + static_cast<long>(j)) * step;
      // Two-sided fBm: Cov = (|s|^2H + |t|^2H - |s-t|^2H) / 2.
      const double h2 = 2.0 * hurst;
      const double exact =
          0.5 * (std::pow(std::abs(s), h2) + std::pow(std::abs(t), h2) - std::pow(std::abs(s - t), h2));
      worst = std::max(worst, std::abs(m.covariance(i, j) - exact));
    }
  return worst;
}

} // namespace

TEST_CASE("sampled covariance matches the fBm kernel") {
  // 40000 draws: the standard error of each entry is about 0.01 or less.
  CHECK(covariance_misfit(0.3, 0, 8, 0.125, 20000) < 0.04);
  CHECK(covariance_misfit(0.7, 0, 8, 0.125, 20000) < 0.04);
  CHECK(covariance_misfit(0.5, -4, 4, 0.25, 20000) < 0.04);
}

TEST_CASE("circulant and Cholesky samplers agree in distribution") {
  const std::size_t n = 12;
  auto acov = [](std::size_t k) { return fgn_autocov(k, 0.8); };
  StationaryGaussianSampler circ(n, acov);
  StationaryGaussianSampler chol(n, acov, {1e-10, true, 0.0});
  CHECK(circ.method() == StationaryGaussianSampler::Method::circulant);
  CHECK(chol.method() == StationaryGaussianSampler::Method::cholesky);

  for (auto* s : {&circ, &chol}) {
    MomentAccumulator m(n);
    auto ws = s->make_workspace();
    std::vector<double> a(n), b(n);
    for (std::size_t p = 0; p < 20000; ++p) {
      NormalStream normals(derive_seed(9, {p}));
      s->sample_pair(normals, ws, a, b);
      m.add(a);
      m.add(b);
    }
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(m.covariance(0, k) - acov(k)) < 0.03);
  }
}

TEST_CASE("derived seeds are pure and distinct") {
  CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));
  NormalStream a(4), b(4);
  CHECK(a.next() == b.next());
}
