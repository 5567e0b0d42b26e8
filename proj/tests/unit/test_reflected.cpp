#include <doctest.h>

#include <vector>

#include "refbm/errors.hpp"
#include "refbm/fbm.hpp"
#include "refbm/reflected.hpp"

using namespace refbm;

namespace {

SamplePath path_of(std::vector<double> values, double horizon) {
  SamplePath p;
  p.grid = Grid(horizon, values.size() - 1);
  p.values = std::move(values);
  return p;
}

} // namespace

TEST_CASE("running infimum and reflection by hand") {
  const auto y = path_of({0.0, 1.0, -1.0, 2.0, -3.0}, 4.0);
  CHECK(running_infimum(y).values == std::vector<double>{0.0, 0.0, -1.0, -1.0, -3.0});
  CHECK(reflect(y, 1.0).values == std::vector<double>{0.0, 1.0, 0.0, 3.0, 0.0});
  CHECK(reflect(y, 0.5).values == std::vector<double>{0.0, 1.0, -0.5, 2.5, -1.5});
  CHECK(reflect(y, 0.0).values == y.values);
  CHECK_THROWS_AS(reflect(path_of({1.0, 0.0}, 1.0), 0.5), DomainError);
  CHECK_THROWS_AS(reflect(y, 1.5), DomainError);
}

TEST_CASE("passage times use strict exceedance") {
  const auto w = path_of({0.0, 1.0, 2.0, 1.0, 2.5, 0.0, 2.1, 0.0}, 3.5);
  const auto rec = passage_times(w, 2.0);
  REQUIRE(rec.ruined);
  CHECK(*rec.tau1 == doctest::Approx(2.0));
  CHECK(*rec.tau2 == doctest::Approx(3.0));

  const auto none = passage_times(w, 3.0);
  CHECK_FALSE(none.ruined);
  CHECK_FALSE(none.tau1.has_value());
  CHECK_THROWS_AS(passage_times(w, 0.0), DomainError);
}

TEST_CASE("fused passage agrees with reflect then scan") {
  const ModelParams params{0.6, 0.7, 0.5};
  const Grid grid(20.0, 400);
  for (Seed seed = 1; seed <= 50; ++seed) {
    const auto y = sample_drifted_input(params, grid, seed);
    const auto w = reflect(y, params.gamma);
    const auto slow = passage_times(w, 1.0);
    const auto fast = reflected_passage(y, params.gamma, 1.0);
    CHECK(slow.ruined == fast.ruined);
    CHECK(slow.tau1 == fast.tau1);
    CHECK(slow.tau2 == fast.tau2);
    double top = w.values.front();
    for (double v : w.values) top = std::max(top, v);
    CHECK(reflected_maximum(y.values, params.gamma) == top);
    // tau1 <= tau2, ruin iff the maximum exceeds the level
    if (fast.ruined) CHECK(*fast.tau1 <= *fast.tau2);
    CHECK(fast.ruined == (top > 1.0));
  }
}
