#include "refbm/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <fmt/format.h>

#include "refbm/constants.hpp"
#include "refbm/errors.hpp"
#include "refbm/parallel.hpp"

namespace refbm {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kMaxJitter = 1e-6;
constexpr std::size_t kChunk = 512;

// Lower Cholesky factor (row-major) with escalating diagonal jitter.
std::vector<double> cholesky_with_jitter(const Eigen::MatrixXd& cov, double& jitter_used) {
  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd a = cov;
    if (jitter > 0.0) a.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      jitter_used = jitter;
      const Eigen::MatrixXd l = llt.matrixL();
      std::vector<double> out(static_cast<std::size_t>(l.size()));
      Eigen::Map<RowMatrix>(out.data(), l.rows(), l.cols()) = l;
      return out;
    }
    if (jitter >= kMaxJitter)
      throw SamplingError(fmt::format("covariance not factorable with jitter up to {:g}", kMaxJitter));
    jitter = jitter == 0.0 ? 1e-12 : jitter * 10.0;
  }
}

std::vector<double> axis_factor(const std::vector<double>& pts, double alpha, double scale,
                                double& jitter) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      cov(i, j) = std::exp(-scale * std::pow(std::abs(pts[i] - pts[j]), alpha));
  return cholesky_with_jitter(cov, jitter);
}

std::vector<std::size_t> region_indices(const FieldGrid& grid, const Rect& region) {
  std::vector<std::size_t> idx;
  const std::size_t nt = grid.t_points.size();
  for (std::size_t i = 0; i < grid.s_points.size(); ++i)
    for (std::size_t j = 0; j < nt; ++j)
      if (region.contains(grid.s_points[i], grid.t_points[j])) idx.push_back(i * nt + j);
  return idx;
}

double max_at(std::span<const double> values, const std::vector<std::size_t>& idx) {
  double best = -std::numeric_limits<double>::infinity();
  for (auto k : idx) best = std::max(best, values[k]);
  return best;
}

// Counts of sup > level for several index sets, accumulated over replicates.
template <class Draw>
std::vector<std::size_t> count_exceedances(std::size_t replicates, unsigned threads,
                                           std::size_t points,
                                           const std::vector<std::vector<std::size_t>>& sets,
                                           double level, Draw make_draw) {
  const std::size_t chunks = (replicates + kChunk - 1) / kChunk;
  std::vector<std::vector<std::size_t>> partial(chunks, std::vector<std::size_t>(sets.size(), 0));
  parallel_for_with_state(
      chunks, threads,
      [&] { return std::make_pair(make_draw(), std::vector<double>(points)); },
      [&](auto& state, std::size_t chunk) {
        auto& [draw, values] = state;
        const std::size_t first = chunk * kChunk;
        const std::size_t last = std::min(replicates, first + kChunk);
        for (std::size_t r = first; r < last; ++r) {
          draw(r, std::span<double>(values));
          for (std::size_t k = 0; k < sets.size(); ++k)
            if (max_at(values, sets[k]) > level) ++partial[chunk][k];
        }
      });
  std::vector<std::size_t> total(sets.size(), 0);
  for (const auto& p : partial)
    for (std::size_t k = 0; k < sets.size(); ++k) total[k] += p[k];
  return total;
}

double binomial_se(double p, std::size_t n) {
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

} // namespace

// ---------------------------------------------------------------------------

void FieldGrid::validate(std::size_t budget) const {
  for (const auto* axis : {&s_points, &t_points}) {
    if (axis->empty()) throw DomainError("field grid axes must be nonempty");
    for (std::size_t i = 1; i < axis->size(); ++i)
      if (!((*axis)[i] > (*axis)[i - 1]))
        throw DomainError("field grid axes must be strictly ascending");
  }
  if (size() > budget)
    throw BudgetError(fmt::format("field grid has {} points, budget is {}", size(), budget));
}

std::vector<double> FieldGrid::axis(double lo, double hi, double step) {
  if (!(step > 0.0)) throw DomainError("axis step must be positive");
  if (hi < lo) throw DomainError("axis needs lo <= hi");
  std::vector<double> pts;
  const double slack = 1e-9 * std::max(1.0, std::abs(hi - lo));
  for (std::size_t k = 0;; ++k) {
    const double v = lo + static_cast<double>(k) * step;
    if (v > hi + slack) break;
    pts.push_back(v);
  }
  return pts;
}

double sup_over_region(const FieldGrid& grid, std::span<const double> values,
                       const Rect& region) {
  double best = -std::numeric_limits<double>::infinity();
  bool any = false;
  const std::size_t nt = grid.t_points.size();
  for (std::size_t i = 0; i < grid.s_points.size(); ++i)
    for (std::size_t j = 0; j < nt; ++j) {
      if (!region.contains(grid.s_points[i], grid.t_points[j])) continue;
      const double v = values[i * nt + j];
      if (std::isnan(v)) continue;
      best = std::max(best, v);
      any = true;
    }
  if (!any) throw DomainError("region contains no valid grid point");
  return best;
}

double sup_over_region(const FieldSample& sample, const Rect& region) {
  return sup_over_region(sample.grid, sample.values, region);
}

// ---------------------------------------------------------------------------

YFieldSampler::YFieldSampler(const ModelParams& params, FieldGrid grid, std::size_t budget)
    : params_(params), grid_(std::move(grid)) {
  params_.validate();
  grid_.validate(budget);
  if (grid_.s_points.front() < 0.0) throw DomainError("Y field needs s >= 0");
  std::vector<double> all = grid_.s_points;
  all.insert(all.end(), grid_.t_points.begin(), grid_.t_points.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  for (double v : all)
    if (v > 0.0) points_.push_back(v);
  if (points_.size() > budget)
    throw BudgetError(fmt::format("Y field needs {} fBm points, budget is {}", points_.size(), budget));

  auto index_of = [&](double v) -> std::size_t {
    if (v == 0.0) return 0;
    return static_cast<std::size_t>(std::lower_bound(points_.begin(), points_.end(), v) -
                                    points_.begin()) + 1;
  };
  for (double s : grid_.s_points) s_idx_.push_back(index_of(s));
  for (double t : grid_.t_points) t_idx_.push_back(index_of(t));

  const auto n = static_cast<Eigen::Index>(points_.size());
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) cov(i, j) = fbm_cov(points_[i], points_[j], params_.hurst);
  double jitter = 0.0;
  chol_ = cholesky_with_jitter(cov, jitter);
}

void YFieldSampler::sample_into(NormalStream& normals, std::span<double> out) const {
  const std::size_t n = points_.size();
  std::vector<double> z(n), x(n + 1, 0.0);
  normals.fill(z);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const double* row = chol_.data() + i * n;
    for (std::size_t k = 0; k <= i; ++k) acc += row[k] * z[k];
    x[i + 1] = acc;
  }
  const std::size_t nt = grid_.t_points.size();
  const double g = params_.gamma;
  const double c = params_.drift;
  for (std::size_t i = 0; i < grid_.s_points.size(); ++i) {
    const double s = grid_.s_points[i];
    for (std::size_t j = 0; j < nt; ++j) {
      const double t = grid_.t_points[j];
      out[i * nt + j] = s <= t ? (x[t_idx_[j]] - g * x[s_idx_[i]]) / (1.0 + c * (t - g * s))
                               : std::numeric_limits<double>::quiet_NaN();
    }
  }
}

FieldSample YFieldSampler::sample(Seed seed) const {
  FieldSample out{grid_, std::vector<double>(grid_.size())};
  NormalStream normals(seed);
  sample_into(normals, out.values);
  return out;
}

FieldSample sample_y_field(const ModelParams& params, const FieldGrid& grid, Seed seed,
                           std::size_t budget) {
  return YFieldSampler(params, grid, budget).sample(seed);
}

// ---------------------------------------------------------------------------

SeparableFieldSampler::SeparableFieldSampler(FieldGrid grid, Kernel kernel,
                                             const std::function<double(double, double)>& weight,
                                             std::size_t budget)
    : grid_(std::move(grid)) {
  grid_.validate(budget);
  for (double a : {kernel.alpha_s, kernel.alpha_t})
    if (!(a > 0.0 && a <= 2.0)) throw DomainError("kernel exponents must lie in (0,2]");
  if (!(kernel.a_s > 0.0 && kernel.a_t > 0.0)) throw DomainError("kernel scales must be positive");
  chol_s_ = axis_factor(grid_.s_points, kernel.alpha_s, kernel.a_s, jitter_s_);
  chol_t_ = axis_factor(grid_.t_points, kernel.alpha_t, kernel.a_t, jitter_t_);
  weights_.reserve(grid_.size());
  for (double s : grid_.s_points)
    for (double t : grid_.t_points) {
      const double w = weight(s, t);
      if (!(w > 0.0)) throw DomainError("field weight must be positive on the grid");
      weights_.push_back(w);
    }
}

SeparableFieldSampler::Workspace SeparableFieldSampler::make_workspace() const {
  return {std::vector<double>(grid_.size()), std::vector<double>(grid_.size())};
}

void SeparableFieldSampler::sample_xi(NormalStream& normals, Workspace& ws,
                                      std::span<double> out) const {
  const auto ns = static_cast<Eigen::Index>(grid_.s_points.size());
  const auto nt = static_cast<Eigen::Index>(grid_.t_points.size());
  normals.fill(ws.z);
  Eigen::Map<const RowMatrix> ls(chol_s_.data(), ns, ns);
  Eigen::Map<const RowMatrix> lt(chol_t_.data(), nt, nt);
  Eigen::Map<const RowMatrix> z(ws.z.data(), ns, nt);
  Eigen::Map<RowMatrix> tmp(ws.tmp.data(), ns, nt);
  Eigen::Map<RowMatrix> xi(out.data(), ns, nt);
  tmp.noalias() = ls.triangularView<Eigen::Lower>() * z;
  xi.noalias() = tmp * lt.transpose().triangularView<Eigen::Upper>();
}

void SeparableFieldSampler::sample_into(NormalStream& normals, Workspace& ws,
                                        std::span<double> out) const {
  sample_xi(normals, ws, out);
  for (std::size_t k = 0; k < weights_.size(); ++k) out[k] /= weights_[k];
}

FieldSample SeparableFieldSampler::sample_xi(Seed seed) const {
  FieldSample out{grid_, std::vector<double>(grid_.size())};
  NormalStream normals(seed);
  auto ws = make_workspace();
  sample_xi(normals, ws, out.values);
  return out;
}

FieldSample SeparableFieldSampler::sample(Seed seed) const {
  FieldSample out{grid_, std::vector<double>(grid_.size())};
  NormalStream normals(seed);
  auto ws = make_workspace();
  sample_into(normals, ws, out.values);
  return out;
}

SeparableFieldSampler make_canonical_sampler(const FieldSpec& spec, FieldGrid grid,
                                             std::size_t budget) {
  spec.validate();
  const SeparableFieldSampler::Kernel kernel{spec.beta, spec.a1, spec.beta, spec.a2};
  return SeparableFieldSampler(
      std::move(grid), kernel,
      [spec](double s, double t) {
        const double dt = std::abs(t - spec.t0);
        return (1.0 + spec.b1 * std::pow(std::abs(s), spec.beta)) *
               (1.0 + spec.b2 * dt * dt + spec.b3 * dt * std::abs(s));
      },
      budget);
}

FieldSample sample_canonical_field(const FieldSpec& spec, const FieldGrid& grid, Seed seed,
                                   std::size_t budget) {
  return make_canonical_sampler(spec, grid, budget).sample(seed);
}

// ---------------------------------------------------------------------------

namespace {

struct Thm21Layout {
  FieldGrid grid;
  double step = 0.0;
  std::size_t s_zero = 0;  // parity anchors for the coarse sub-grid
  std::size_t t_zero = 0;
};

// Fine grid over the union of both Delta regions, anchored at s = 0 and t = t0.
Thm21Layout thm21_layout(const FieldSpec& spec, double u, const FieldMc& mc) {
  const double d1 = delta1(u, spec.beta);
  const double d2 = delta2(u);
  double step = std::pow(u, -2.0 / spec.beta) / mc.points_per_cell / 2.0;
  for (;;) {
    const auto ns = static_cast<std::size_t>(std::floor(d1 / step + 1e-9)) + 1;
    const auto half = static_cast<std::size_t>(std::floor(d2 / step + 1e-9));
    if (ns * (2 * half + 1) <= mc.budget) {
      Thm21Layout out;
      out.step = step;
      for (std::size_t i = 0; i < ns; ++i) out.grid.s_points.push_back(static_cast<double>(i) * step);
      for (std::size_t j = 0; j < 2 * half + 1; ++j)
        out.grid.t_points.push_back(spec.t0 + (static_cast<double>(j) - static_cast<double>(half)) * step);
      out.t_zero = half;
      return out;
    }
    step *= 1.25;
  }
}

} // namespace

Thm21Report verify_thm21(const FieldSpec& spec, double x, const std::vector<double>& u_ladder,
                         const FieldMc& mc, const FieldConstants& constants, bool limit_mode) {
  spec.validate();
  if (mc.replicates < 1) throw DomainError("replicates must be >= 1");
  Thm21Report report;
  report.spec = spec;
  report.x = x;
  report.limit_mode = limit_mode;
  report.replicates = mc.replicates;
  report.seed = mc.seed;

  for (std::size_t level = 0; level < u_ladder.size(); ++level) {
    const double u = u_ladder[level];
    const double x_u = limit_mode ? std::log(u) : x;
    const auto [first, second] = delta_regions(u, x_u, spec);
    const Rect both{first.s_lo, first.s_hi, first.t_lo, second.t_hi};

    const Thm21Layout layout = thm21_layout(spec, u, mc);
    const SeparableFieldSampler sampler = make_canonical_sampler(spec, layout.grid, mc.budget);
    const double tol = 1e-9 * layout.step;
    Rect f = first, s2 = second, un = both;
    for (Rect* r : {&f, &s2, &un}) {
      r->s_hi += tol;
      r->t_lo -= tol;
      r->t_hi += tol;
    }
    auto fine_first = region_indices(layout.grid, f);
    std::vector<std::size_t> coarse_first;
    const std::size_t nt = layout.grid.t_points.size();
    for (auto k : fine_first) {
      const std::size_t i = k / nt;
      const std::size_t j = k % nt;
      const auto dj = static_cast<long>(j) - static_cast<long>(layout.t_zero);
      if (i % 2 == 0 && dj % 2 == 0) coarse_first.push_back(k);
    }
    const auto second_idx = region_indices(layout.grid, s2);
    const auto union_idx = region_indices(layout.grid, un);
    if (fine_first.empty()) throw DomainError("first Delta region holds no grid point");

    std::vector<std::vector<std::size_t>> sets{fine_first, coarse_first, second_idx, union_idx};
    const auto hits = count_exceedances(
        mc.replicates, mc.threads, layout.grid.size(), sets, u, [&] {
          return [&sampler, ws = sampler.make_workspace(), seed = mc.seed, level](
                     std::size_t r, std::span<double> out) mutable {
            NormalStream normals(derive_seed(seed, {level, r}));
            sampler.sample_into(normals, ws, out);
          };
        });

    Thm21Row row;
    row.u = u;
    const double n = static_cast<double>(mc.replicates);
    row.empirical_p = static_cast<double>(hits[0]) / n;
    row.std_error = binomial_se(row.empirical_p, mc.replicates);
    row.coarse_p = static_cast<double>(hits[1]) / n;
    row.second_p = static_cast<double>(hits[2]) / n;
    row.union_p = static_cast<double>(hits[3]) / n;
    row.predicted_p = field_sup_asymptotic(u, x_u, spec, RegionSide::first, constants, limit_mode).value;
    row.second_predicted_p = field_sup_asymptotic(u, x_u, spec, RegionSide::second, constants).value;
    row.ratio = row.empirical_p / row.predicted_p;
    row.grid_step = layout.step;
    row.points = layout.grid.size();
    row.infeasible = row.predicted_p < 10.0 / n;
    if (row.infeasible)
      report.warnings.push_back(fmt::format(
          "u={:.6g}: predicted probability {:.6g} is below 10/replicates; estimate unreliable", u,
          row.predicted_p));
    if (sampler.jitter() > 0.0)
      report.warnings.push_back(fmt::format("u={:.6g}: covariance jitter {:.3g} was added", u,
                                            sampler.jitter()));
    report.rows.push_back(row);
  }
  return report;
}

std::vector<double> first_side_curve(const FieldSpec& spec, double u,
                                     const std::vector<double>& xs, const FieldMc& mc) {
  spec.validate();
  const Thm21Layout layout = thm21_layout(spec, u, mc);
  const SeparableFieldSampler sampler = make_canonical_sampler(spec, layout.grid, mc.budget);
  std::vector<std::vector<std::size_t>> sets;
  for (double x : xs) {
    Rect r = delta_regions(u, x, spec).first;
    r.t_hi += 1e-9 * layout.step;
    r.s_hi += 1e-9 * layout.step;
    r.t_lo -= 1e-9 * layout.step;
    sets.push_back(region_indices(layout.grid, r));
  }
  const auto hits = count_exceedances(
      mc.replicates, mc.threads, layout.grid.size(), sets, u, [&] {
        return [&sampler, ws = sampler.make_workspace(), seed = mc.seed](
                   std::size_t r, std::span<double> out) mutable {
          NormalStream normals(derive_seed(seed, {r}));
          sampler.sample_into(normals, ws, out);
        };
      });
  std::vector<double> out;
  for (auto h : hits) out.push_back(static_cast<double>(h) / static_cast<double>(mc.replicates));
  return out;
}

// ---------------------------------------------------------------------------

PiterbargReport verify_piterbarg_lemma(const PiterbargLemmaSetup& setup,
                                       const std::vector<double>& u_ladder, const FieldMc& mc) {
  if (!(setup.alpha1 > 0.0 && setup.alpha1 <= 2.0 && setup.alpha2 > 0.0 && setup.alpha2 <= 2.0))
    throw DomainError("alpha1 and alpha2 must lie in (0,2]");
  if (!(setup.b1 >= 0.0)) throw DomainError("b1 must be >= 0");
  if (!(setup.b2 > 0.0)) throw DomainError("b2 must be > 0");
  if (!(setup.s_len > 0.0)) throw DomainError("S must be positive");
  if (!(setup.t_lo < setup.t_hi)) throw DomainError("need T1 < T2");
  if (!(setup.scaled_step > 0.0)) throw DomainError("scaled step must be positive");

  PiterbargReport report;
  report.setup = setup;

  // Right side: truncated constants on the same scaled lattice, no step halving.
  McBudget cmc;
  cmc.replicates = setup.constant_replicates;
  cmc.seed = derive_seed(mc.seed, {0xC0u});
  cmc.threads = mc.threads;
  cmc.halve_step = false;
  const auto intervals = [&](double len) {
    return static_cast<std::size_t>(std::llround(len / setup.scaled_step));
  };
  {
    ConstantSpec s_spec{setup.alpha1, std::nullopt, 0.0, setup.s_len, cmc};
    s_spec.mc.grid_intervals = std::max<std::size_t>(1, intervals(setup.s_len));
    if (setup.b1 == 0.0) {
      report.pickands_substituted = true;
      report.s_constant = pickands_truncated(s_spec).estimate;
    } else {
      s_spec.a = setup.b1;
      report.s_constant = piterbarg_truncated(s_spec).estimate;
    }
  }
  {
    ConstantSpec t_spec{setup.alpha2, setup.b2, setup.t_lo, setup.t_hi, cmc};
    t_spec.mc.seed = derive_seed(mc.seed, {0xC1u});
    t_spec.mc.grid_intervals = std::max<std::size_t>(1, intervals(setup.t_hi - setup.t_lo));
    report.t_constant = piterbarg_truncated(t_spec).estimate;
  }
  const double product = report.s_constant.value * report.t_constant.value;
  const double product_rel =
      std::hypot(report.s_constant.relative_error(), report.t_constant.relative_error());
  if (report.pickands_substituted)
    report.warnings.push_back("b1 = 0: the s-factor is the Pickands constant H_alpha1[0,S]");

  for (std::size_t level = 0; level < u_ladder.size(); ++level) {
    const double u = u_ladder[level];
    if (!(u > 0.0)) throw DomainError("levels must be positive");
    const double scale_s = std::pow(u, -2.0 / setup.alpha1);
    const double scale_t = std::pow(u, -2.0 / setup.alpha2);
    FieldGrid grid;
    for (double v : FieldGrid::axis(0.0, setup.s_len, setup.scaled_step))
      grid.s_points.push_back(v * scale_s);
    const long k_lo = static_cast<long>(std::ceil(setup.t_lo / setup.scaled_step - 1e-9));
    const long k_hi = static_cast<long>(std::floor(setup.t_hi / setup.scaled_step + 1e-9));
    for (long k = k_lo; k <= k_hi; ++k)
      grid.t_points.push_back(static_cast<double>(k) * setup.scaled_step * scale_t);

    const SeparableFieldSampler sampler(
        grid, {setup.alpha1, 1.0, setup.alpha2, 1.0},
        [&](double s, double t) {
          return (1.0 + setup.b1 * std::pow(s, setup.alpha1)) *
                 (1.0 + setup.b2 * std::pow(std::abs(t), setup.alpha2));
        },
        mc.budget);

    const double g = setup.shifted_level ? u + 1.0 / u : u;
    std::vector<std::size_t> all(grid.size());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
    const auto hits = count_exceedances(
        mc.replicates, mc.threads, grid.size(), {all}, g, [&] {
          return [&sampler, ws = sampler.make_workspace(), seed = mc.seed, level](
                     std::size_t r, std::span<double> out) mutable {
            NormalStream normals(derive_seed(seed, {1 + level, r}));
            sampler.sample_into(normals, ws, out);
          };
        });

    PiterbargRow row;
    row.u = u;
    row.level = g;
    row.points = grid.size();
    row.empirical_p = static_cast<double>(hits[0]) / static_cast<double>(mc.replicates);
    row.std_error = binomial_se(row.empirical_p, mc.replicates);
    row.predicted_p = product * normal_sf(g);
    row.predicted_std_error = row.predicted_p * product_rel;
    row.ratio = row.empirical_p / row.predicted_p;
    const double se = std::hypot(row.std_error, row.predicted_std_error);
    row.z_score = se > 0.0 ? (row.empirical_p - row.predicted_p) / se : 0.0;
    row.infeasible = row.predicted_p < 10.0 / static_cast<double>(mc.replicates);
    if (row.infeasible)
      report.warnings.push_back(fmt::format(
          "u={:.6g}: predicted probability {:.6g} is below 10/replicates; estimate unreliable", u,
          row.predicted_p));
    report.rows.push_back(row);
  }
  return report;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const FieldSpec& spec) {
  return {{"beta", spec.beta}, {"b1", spec.b1}, {"b2", spec.b2}, {"b3", spec.b3},
          {"a1", spec.a1},     {"a2", spec.a2}, {"t0", spec.t0}};
}

nlohmann::json to_json(const Thm21Report& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"u", r.u},
                    {"empirical_p", r.empirical_p},
                    {"std_error", r.std_error},
                    {"predicted_p", r.predicted_p},
                    {"ratio", r.ratio},
                    {"coarse_p", r.coarse_p},
                    {"second_p", r.second_p},
                    {"second_predicted_p", r.second_predicted_p},
                    {"union_p", r.union_p},
                    {"grid_step", r.grid_step},
                    {"points", r.points},
                    {"infeasible", r.infeasible}});
  return {{"spec", to_json(report.spec)},
          {"x", report.x},
          {"limit_mode", report.limit_mode},
          {"replicates", report.replicates},
          {"seed", report.seed},
          {"rows", rows},
          {"warnings", report.warnings}};
}

nlohmann::json to_json(const PiterbargReport& report) {
  const auto& s = report.setup;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"u", r.u},
                    {"level", r.level},
                    {"empirical_p", r.empirical_p},
                    {"std_error", r.std_error},
                    {"predicted_p", r.predicted_p},
                    {"predicted_std_error", r.predicted_std_error},
                    {"ratio", r.ratio},
                    {"z_score", r.z_score},
                    {"points", r.points},
                    {"infeasible", r.infeasible}});
  return {{"setup",
           {{"alpha1", s.alpha1},
            {"alpha2", s.alpha2},
            {"b1", s.b1},
            {"b2", s.b2},
            {"S", s.s_len},
            {"T1", s.t_lo},
            {"T2", s.t_hi},
            {"scaled_step", s.scaled_step},
            {"level", s.shifted_level ? "u+1/u" : "u"}}},
          {"s_constant", {{"value", report.s_constant.value}, {"std_error", report.s_constant.std_error}}},
          {"t_constant", {{"value", report.t_constant.value}, {"std_error", report.t_constant.std_error}}},
          {"pickands_substituted", report.pickands_substituted},
          {"rows", rows},
          {"warnings", report.warnings}};
}

} // namespace refbm
