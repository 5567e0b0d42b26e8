#include "refbm/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "refbm/asymptotics.hpp"
#include "refbm/errors.hpp"
#include "refbm/fbm.hpp"
#include "refbm/moments.hpp"
#include "refbm/parallel.hpp"

namespace refbm {

std::optional<double> pickands_closed(double alpha) {
  if (alpha == 1.0) return 1.0;
  if (alpha == 2.0) return 1.0 / std::sqrt(std::numbers::pi);
  return std::nullopt;
}

std::optional<double> piterbarg_closed(double alpha, double a) {
  if (!(a > 0.0)) throw DomainError("Piterbarg weight a must be positive");
  if (alpha == 1.0) return 1.0 + 1.0 / a;
  if (alpha == 2.0) return 0.5 * (1.0 + std::sqrt(1.0 + 1.0 / a));
  return std::nullopt;
}

void ConstantSpec::validate() const {
  if (!(alpha > 0.0 && alpha <= 2.0))
    throw DomainError("alpha must lie in (0,2], got " + std::to_string(alpha));
  if (a && !(*a > 0.0)) throw DomainError("Piterbarg weight a must be positive");
  if (!(lo <= hi)) throw DomainError("constant interval needs lo <= hi");
  if (mc.replicates < 1) throw DomainError("replicates must be >= 1");
  if (mc.grid_intervals < 1) throw DomainError("grid_intervals must be >= 1");
}

double discretization_order(double alpha) { return alpha >= 2.0 ? 2.0 : alpha / 2.0; }

namespace {

constexpr std::size_t kPairsPerChunk = 256;

struct Rung {
  long k_first;  // fine-lattice index range inside the rung interval
  long k_last;
};

// Monte Carlo of E exp(min(cap, sup_{t in rung} (sqrt2 B_alpha(t) - w |t|^alpha)))
// over several intervals at once, each evaluated on a fine lattice (step h_f)
// and its even-index coarse sublattice. Every Gaussian draw B is used together
// with its mirror -B; one replicate contributes the average of the two.
struct LatticeRun {
  double alpha;
  double weight;  // 1 for Pickands, 1 + a for Piterbarg
  double h_fine;
  long k_lo;
  long k_hi;
  std::vector<Rung> rungs;
  bool halve;
  std::vector<double> penalty;  // weight |t_k|^alpha, indexed k - k_lo
};

struct RunResult {
  MomentAccumulator moments;  // layout: [fine_0, coarse_0, fine_1, coarse_1, ...]
  std::size_t cap_hits = 0;
};

std::size_t value_dim(const LatticeRun& run) { return 2 * run.rungs.size(); }

long ceil_index(double x, double h) { return static_cast<long>(std::ceil(x / h - 1e-9)); }
long floor_index(double x, double h) { return static_cast<long>(std::floor(x / h + 1e-9)); }

LatticeRun plan_lattice(double alpha, double weight, const std::vector<std::pair<double, double>>& intervals,
                        const McBudget& mc) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (auto [a, b] : intervals) {
    lo = std::min(lo, a);
    hi = std::max(hi, b);
  }
  LatticeRun run{alpha, weight, 0.0, 0, 0, {}, mc.halve_step, {}};
  const double width = hi - lo;
  const double h_coarse = width > 0.0 ? width / static_cast<double>(mc.grid_intervals) : 1.0;
  run.h_fine = mc.halve_step ? h_coarse / 2.0 : h_coarse;
  for (auto [a, b] : intervals) {
    Rung r{ceil_index(a, run.h_fine), floor_index(b, run.h_fine)};
    if (r.k_first > r.k_last) throw DomainError("constant interval contains no grid point");
    run.rungs.push_back(r);
  }
  for (const auto& r : run.rungs) {
    run.k_lo = std::min(run.k_lo, r.k_first);
    run.k_hi = std::max(run.k_hi, r.k_last);
  }
  const double points = static_cast<double>(run.k_hi - run.k_lo + 1);
  if (points * static_cast<double>(mc.replicates) > mc.max_work)
    throw BudgetError("grid points x replicates (" +
                      std::to_string(points * static_cast<double>(mc.replicates)) +
                      ") exceeds the configured budget");
  for (long k = run.k_lo; k <= run.k_hi; ++k)
    run.penalty.push_back(weight * std::pow(std::abs(static_cast<double>(k) * run.h_fine), alpha));
  return run;
}

// Adds exp(capped sup) of `sign * path` to `row` with factor 1/2.
void evaluate_path(const LatticeRun& run, std::span<const double> path, double sign, double cap,
                   std::vector<double>& row, std::size_t& cap_hits) {
  const double scale = sign * std::numbers::sqrt2;
  for (std::size_t r = 0; r < run.rungs.size(); ++r) {
    const Rung& rung = run.rungs[r];
    double best_fine = -std::numeric_limits<double>::infinity();
    double best_coarse = -std::numeric_limits<double>::infinity();
    for (long k = rung.k_first; k <= rung.k_last; ++k) {
      const auto j = static_cast<std::size_t>(k - run.k_lo);
      const double v = scale * path[j] - run.penalty[j];
      best_fine = std::max(best_fine, v);
      if (!run.halve || (k % 2 == 0)) best_coarse = std::max(best_coarse, v);
    }
    if (best_coarse == -std::numeric_limits<double>::infinity()) best_coarse = best_fine;
    if (best_fine > cap) {
      ++cap_hits;
      best_fine = cap;
    }
    best_coarse = std::min(best_coarse, cap);
    row[2 * r] += 0.5 * std::exp(best_fine);
    row[2 * r + 1] += 0.5 * std::exp(best_coarse);
  }
}

RunResult run_lattice(const LatticeRun& run, const McBudget& mc) {
  const std::size_t dim = value_dim(run);
  const std::size_t pairs = (mc.replicates + 1) / 2;
  const std::size_t chunks = (pairs + kPairsPerChunk - 1) / kPairsPerChunk;
  const std::size_t points = static_cast<std::size_t>(run.k_hi - run.k_lo + 1);

  std::optional<FbmSampler> sampler;
  if (run.alpha < 2.0) sampler.emplace(run.alpha / 2.0, run.h_fine, run.k_lo, run.k_hi);

  std::vector<RunResult> partial(chunks, RunResult{MomentAccumulator(dim), 0});

  struct State {
    std::optional<StationaryGaussianSampler::Workspace> ws;
    std::vector<double> a, b, row;
  };
  parallel_for_with_state(
      chunks, mc.threads,
      [&] {
        State s;
        if (sampler) s.ws.emplace(sampler->make_workspace());
        s.a.resize(points);
        s.b.resize(points);
        s.row.resize(dim);
        return s;
      },
      [&](State& s, std::size_t chunk) {
        RunResult& out = partial[chunk];
        const std::size_t first = chunk * kPairsPerChunk;
        const std::size_t last = std::min(pairs, first + kPairsPerChunk);
        auto consume = [&](const std::vector<double>& path) {
          std::fill(s.row.begin(), s.row.end(), 0.0);
          evaluate_path(run, path, 1.0, mc.cap, s.row, out.cap_hits);
          evaluate_path(run, path, -1.0, mc.cap, s.row, out.cap_hits);
          out.moments.add(s.row);
        };
        for (std::size_t p = first; p < last; ++p) {
          NormalStream normals(derive_seed(mc.seed, {p}));
          if (sampler) {
            sampler->sample_pair(normals, *s.ws, s.a, s.b);
          } else {
            // B_2(t) = N t is the fBm with H = 1.
            const double na = normals.next();
            const double nb = normals.next();
            for (std::size_t j = 0; j < points; ++j) {
              const double t = static_cast<double>(run.k_lo + static_cast<long>(j)) * run.h_fine;
              s.a[j] = na * t;
              s.b[j] = nb * t;
            }
          }
          consume(s.a);
          if (2 * p + 1 < mc.replicates) consume(s.b);
        }
      });

  RunResult total{MomentAccumulator(dim), 0};
  for (const auto& part : partial) {
    total.moments.merge(part.moments);
    total.cap_hits += part.cap_hits;
  }
  return total;
}

// Per-replicate weights of the headline estimator for rung r.
std::vector<double> headline_weights(const LatticeRun& run, std::size_t r) {
  std::vector<double> w(value_dim(run), 0.0);
  if (!run.halve) {
    w[2 * r] = 1.0;
    return w;
  }
  const double q = std::pow(2.0, -discretization_order(run.alpha));
  w[2 * r] = 1.0 / (1.0 - q);
  w[2 * r + 1] = -q / (1.0 - q);
  return w;
}

EstimateWithError functional(const MomentAccumulator& m, const std::vector<double>& w) {
  return {m.combination_mean(w), m.combination_std_error(w), m.count(),
          EstimateMethod::monte_carlo};
}

EstimateWithError component(const LatticeRun& run, const MomentAccumulator& m, std::size_t index) {
  std::vector<double> w(value_dim(run), 0.0);
  w[index] = 1.0;
  return functional(m, w);
}

TruncatedEstimate make_truncated(const LatticeRun& run, const RunResult& res, std::size_t r,
                                 const ConstantSpec& spec) {
  TruncatedEstimate out;
  out.spec = spec;
  out.fine = component(run, res.moments, 2 * r);
  out.coarse = component(run, res.moments, 2 * r + 1);
  out.estimate = functional(res.moments, headline_weights(run, r));
  out.grid_step = run.halve ? 2.0 * run.h_fine : run.h_fine;
  out.cap_hits = res.cap_hits;
  return out;
}

TruncatedEstimate truncated(const ConstantSpec& spec, double weight) {
  spec.validate();
  if (spec.lo == spec.hi && spec.lo == 0.0) {
    // Degenerate interval {0}: the sup is the t = 0 value, exp(0) = 1.
    TruncatedEstimate out;
    out.spec = spec;
    out.estimate = out.fine = out.coarse = {1.0, 0.0, spec.mc.replicates, EstimateMethod::monte_carlo};
    return out;
  }
  const LatticeRun run = plan_lattice(spec.alpha, weight, {{spec.lo, spec.hi}}, spec.mc);
  const RunResult res = run_lattice(run, spec.mc);
  return make_truncated(run, res, 0, spec);
}

} // namespace

TruncatedEstimate pickands_truncated(const ConstantSpec& spec) {
  if (spec.a) throw DomainError("pickands_truncated takes no Piterbarg weight");
  return truncated(spec, 1.0);
}

TruncatedEstimate piterbarg_truncated(const ConstantSpec& spec) {
  if (!spec.a) throw DomainError("piterbarg_truncated needs a weight a");
  return truncated(spec, 1.0 + *spec.a);
}

std::vector<TruncatedEstimate> truncated_ladder(double alpha, std::optional<double> a,
                                                const std::vector<double>& t_ladder,
                                                const McBudget& mc) {
  if (t_ladder.empty()) throw DomainError("T ladder is empty");
  std::vector<std::pair<double, double>> intervals;
  for (double t : t_ladder) {
    if (!(t > 0.0)) throw DomainError("ladder values must be positive");
    intervals.emplace_back(0.0, t);
  }
  ConstantSpec base{alpha, a, 0.0, *std::max_element(t_ladder.begin(), t_ladder.end()), mc};
  base.validate();
  const LatticeRun run = plan_lattice(alpha, a ? 1.0 + *a : 1.0, intervals, mc);
  const RunResult res = run_lattice(run, mc);
  std::vector<TruncatedEstimate> out;
  for (std::size_t r = 0; r < t_ladder.size(); ++r) {
    ConstantSpec spec = base;
    spec.hi = t_ladder[r];
    out.push_back(make_truncated(run, res, r, spec));
  }
  return out;
}

std::vector<double> default_pickands_ladder(double alpha) {
  if (alpha >= 2.0) return {0.25, 0.5, 0.75, 1.0};
  if (alpha > 1.0) return {1.0, 2.0, 3.0};
  return {2.0, 3.0, 4.0};
}

McBudget default_limit_budget(double alpha) {
  McBudget mc;
  if (alpha >= 2.0) {
    mc.replicates = 2000000;
    mc.grid_intervals = 256;
  } else {
    mc.replicates = 600000;
    mc.grid_intervals = 512;
  }
  return mc;
}

namespace {

// OLS weights giving the intercept of z = H + kappa x at x = 1/T.
std::pair<std::vector<double>, std::vector<double>> fit_weights(const std::vector<double>& ts) {
  const std::size_t n = ts.size();
  Eigen::MatrixXd design(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = 1.0 / ts[i];
  }
  const Eigen::MatrixXd pinv =
      (design.transpose() * design).inverse() * design.transpose();
  std::vector<double> intercept(n), slope(n);
  for (std::size_t i = 0; i < n; ++i) {
    intercept[i] = pinv(0, i);
    slope[i] = pinv(1, i);
  }
  return {intercept, slope};
}

} // namespace

LimitEstimate pickands_limit_estimate(double alpha, const std::vector<double>& t_ladder,
                                      const McBudget& mc) {
  if (t_ladder.size() < 2) throw DomainError("the limit fit needs at least two ladder values");
  std::vector<double> ts = t_ladder;
  std::sort(ts.begin(), ts.end());
  if (std::adjacent_find(ts.begin(), ts.end()) != ts.end())
    throw DomainError("ladder values must be distinct");

  std::vector<std::pair<double, double>> intervals;
  for (double t : ts) intervals.emplace_back(0.0, t);
  ConstantSpec base{alpha, std::nullopt, 0.0, ts.back(), mc};
  base.validate();
  const LatticeRun run = plan_lattice(alpha, 1.0, intervals, mc);
  const RunResult res = run_lattice(run, mc);

  LimitEstimate out;
  out.t_ladder = ts;
  for (std::size_t r = 0; r < ts.size(); ++r) {
    ConstantSpec spec = base;
    spec.hi = ts[r];
    out.ladder.push_back(make_truncated(run, res, r, spec));
  }

  // Per-replicate linear functional: sum_r w_r * headline_r / T_r.
  auto weights = [&](const std::vector<double>& rung_weights, std::size_t offset) {
    std::vector<double> w(value_dim(run), 0.0);
    for (std::size_t r = 0; r < rung_weights.size(); ++r) {
      const auto hw = headline_weights(run, r + offset);
      for (std::size_t k = 0; k < w.size(); ++k) w[k] += rung_weights[r] * hw[k] / ts[r + offset];
    }
    return w;
  };

  const auto [icpt, slope] = fit_weights(ts);
  const EstimateWithError intercept = functional(res.moments, weights(icpt, 0));
  const double value = intercept.value;
  out.mc_std_error = intercept.std_error;
  out.kappa = functional(res.moments, weights(slope, 0)).value;

  if (ts.size() >= 3) {
    const std::vector<double> sub(ts.begin() + 1, ts.end());
    const auto [icpt_sub, unused] = fit_weights(sub);
    const double sub_value = functional(res.moments, weights(icpt_sub, 1)).value;
    out.extrapolation_spread = std::abs(sub_value - value);
  }
  out.estimate = {value, std::hypot(out.mc_std_error, out.extrapolation_spread),
                  res.moments.count(), EstimateMethod::monte_carlo};
  return out;
}

std::vector<ExceedanceRow> pickands_via_exceedance(double alpha, double t,
                                                   const std::vector<double>& u_ladder,
                                                   const McBudget& mc) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("alpha must lie in (0,2]");
  if (!(t > 0.0)) throw DomainError("T must be positive");
  const std::size_t points = mc.grid_intervals + 1;
  if (static_cast<double>(points) * static_cast<double>(mc.replicates) > mc.max_work)
    throw BudgetError("grid points x replicates exceeds the configured budget");

  std::vector<ExceedanceRow> rows;
  for (std::size_t level = 0; level < u_ladder.size(); ++level) {
    const double u = u_ladder[level];
    if (!(u > 0.0)) throw DomainError("exceedance levels must be positive");
    const double h = std::pow(u, -2.0 / alpha) * t / static_cast<double>(mc.grid_intervals);
    StationaryGaussianSampler::Options opts;
    opts.max_jitter = 1e-6;
    const StationaryGaussianSampler sampler(
        points, [&](std::size_t k) { return std::exp(-std::pow(static_cast<double>(k) * h, alpha)); },
        opts);

    const std::size_t pairs = (mc.replicates + 1) / 2;
    const std::size_t chunks = (pairs + kPairsPerChunk - 1) / kPairsPerChunk;
    std::vector<std::size_t> hits(chunks, 0);
    struct State {
      StationaryGaussianSampler::Workspace ws;
      std::vector<double> a, b;
    };
    parallel_for_with_state(
        chunks, mc.threads,
        [&] { return State{sampler.make_workspace(), std::vector<double>(points), std::vector<double>(points)}; },
        [&](State& s, std::size_t chunk) {
          const std::size_t first = chunk * kPairsPerChunk;
          const std::size_t last = std::min(pairs, first + kPairsPerChunk);
          for (std::size_t p = first; p < last; ++p) {
            NormalStream normals(derive_seed(mc.seed, {level, p}));
            sampler.sample_pair(normals, s.ws, s.a, s.b);
            if (*std::max_element(s.a.begin(), s.a.end()) > u) ++hits[chunk];
            if (2 * p + 1 < mc.replicates && *std::max_element(s.b.begin(), s.b.end()) > u)
              ++hits[chunk];
          }
        });
    std::size_t total = 0;
    for (auto c : hits) total += c;
    const double n = static_cast<double>(mc.replicates);
    const double prob = static_cast<double>(total) / n;
    const double psi = normal_sf(u);
    ExceedanceRow row;
    row.u = u;
    row.probability = prob;
    row.exceedances = total;
    row.unstable = total < 50;
    row.estimate = {prob / psi, std::sqrt(prob * (1.0 - prob) / n) / psi, mc.replicates,
                    EstimateMethod::monte_carlo};
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json to_json(const TruncatedEstimate& e) {
  nlohmann::json j;
  j["alpha"] = e.spec.alpha;
  j["a"] = e.spec.a ? nlohmann::json(*e.spec.a) : nlohmann::json(nullptr);
  j["interval"] = {e.spec.lo, e.spec.hi};
  j["value"] = e.estimate.value;
  j["std_error"] = e.estimate.std_error;
  j["replicates"] = e.estimate.replicates;
  j["grid_step"] = e.grid_step;
  j["value_fine"] = e.fine.value;
  j["std_error_fine"] = e.fine.std_error;
  j["value_coarse"] = e.coarse.value;
  j["std_error_coarse"] = e.coarse.std_error;
  j["cap_hits"] = e.cap_hits;
  return j;
}

nlohmann::json to_json(const LimitEstimate& e) {
  nlohmann::json j;
  j["value"] = e.estimate.value;
  j["std_error"] = e.estimate.std_error;
  j["mc_std_error"] = e.mc_std_error;
  j["extrapolation_spread"] = e.extrapolation_spread;
  j["kappa"] = e.kappa;
  j["replicates"] = e.estimate.replicates;
  j["t_ladder"] = e.t_ladder;
  nlohmann::json rungs = nlohmann::json::array();
  for (const auto& r : e.ladder) rungs.push_back(to_json(r));
  j["ladder"] = rungs;
  return j;
}

} // namespace refbm
