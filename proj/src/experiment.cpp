#include "refbm/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "refbm/asymptotics.hpp"
#include "refbm/errors.hpp"
#include "refbm/moments.hpp"
#include "refbm/parallel.hpp"

#ifndef REFBM_VERSION
#define REFBM_VERSION "unknown"
#endif

namespace refbm {

namespace {

constexpr std::size_t kPairsPerChunk = 128;
constexpr double kMaxStepOverA = 0.02;
constexpr double kHorizonCheck = 0.9;
constexpr double kMaxViolationShare = 0.01;

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

double median(std::vector<double> v) {
  if (v.empty()) return nan();
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<long>(mid));
  return 0.5 * (lower + upper);
}

// Chunk visiting order; a permutation only when the testing aid asks for it.
std::vector<std::size_t> chunk_order(std::size_t first, std::size_t count,
                                     const std::optional<Seed>& shuffle) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), first);
  if (shuffle) {
    std::mt19937_64 rng(*shuffle);
    std::shuffle(order.begin(), order.end(), rng);
  }
  return order;
}

std::string timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

} // namespace

std::string to_string(PredictionMode m) {
  return m == PredictionMode::asymptotic ? "asymptotic" : "half-reduced";
}

PredictionMode prediction_mode_from_string(const std::string& s) {
  if (s == "asymptotic") return PredictionMode::asymptotic;
  if (s == "half-reduced") return PredictionMode::half_reduced;
  throw DomainError("prediction must be 'asymptotic' or 'half-reduced', got '" + s + "'");
}

std::string code_version() { return REFBM_VERSION; }

void ExperimentConfig::validate(bool conditional) const {
  if (conditional)
    model.validate_open_gamma();
  else
    model.validate();
  if (levels.empty()) throw DomainError("levels must not be empty");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0) || !std::isfinite(levels[i]))
      throw DomainError("levels must be positive");
    if (i > 0 && !(levels[i] > levels[i - 1]))
      throw DomainError("levels must be strictly ascending");
  }
  if (!(horizon_factor > 1.0)) throw DomainError("horizon_factor must exceed 1");
  if (steps_per_unit < 1) throw DomainError("steps_per_unit must be >= 1");
  if (replicates < 100) throw DomainError("replicates must be >= 100");
  if (prediction == PredictionMode::half_reduced && model.hurst != 0.5)
    throw DomainError("prediction 'half-reduced' requires hurst = 0.5");
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["hurst"] = c.model.hurst;
  j["gamma"] = c.model.gamma;
  j["c"] = c.model.drift;
  j["levels"] = c.levels;
  j["horizon_factor"] = c.horizon_factor;
  j["steps_per_unit"] = c.steps_per_unit;
  j["replicates"] = c.replicates;
  j["target_accepted"] = c.target_accepted;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["out"] = c.output;
  j["prediction"] = to_string(c.prediction);
  if (c.pickands) {
    j["pickands"] = c.pickands->value;
    j["pickands_se"] = c.pickands->std_error;
  }
  if (c.piterbarg) {
    j["piterbarg"] = c.piterbarg->value;
    j["piterbarg_se"] = c.piterbarg->std_error;
  }
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DomainError("config must be a JSON object");
  static const std::vector<std::string> known{
      "hurst",   "gamma", "c",    "levels",     "horizon_factor", "steps_per_unit",
      "replicates", "target_accepted", "seed", "threads", "out", "prediction",
      "pickands", "pickands_se", "piterbarg", "piterbarg_se"};
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw DomainError("unknown config key '" + key + "'");

  ExperimentConfig c;
  try {
    c.model.hurst = j.value("hurst", c.model.hurst);
    c.model.gamma = j.value("gamma", c.model.gamma);
    c.model.drift = j.value("c", c.model.drift);
    c.levels = j.value("levels", c.levels);
    c.horizon_factor = j.value("horizon_factor", c.horizon_factor);
    c.steps_per_unit = j.value("steps_per_unit", c.steps_per_unit);
    c.replicates = j.value("replicates", c.replicates);
    c.target_accepted = j.value("target_accepted", c.target_accepted);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    c.output = j.value("out", c.output);
    c.prediction = prediction_mode_from_string(j.value("prediction", to_string(c.prediction)));
    if (j.contains("pickands"))
      c.pickands = EstimateWithError{j.at("pickands").get<double>(), j.value("pickands_se", 0.0), 0,
                                     EstimateMethod::monte_carlo};
    if (j.contains("piterbarg"))
      c.piterbarg = EstimateWithError{j.at("piterbarg").get<double>(), j.value("piterbarg_se", 0.0),
                                      0, EstimateMethod::monte_carlo};
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed config: ") + e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------

Grid passage_grid(const ExperimentConfig& config, double u) {
  const double unit = t_tilde0(config.model) * u;
  const double a = a_scale(config.model, u);
  auto per_unit = static_cast<double>(config.steps_per_unit);
  per_unit = std::max(per_unit, std::ceil(unit / (kMaxStepOverA * a)));
  const auto steps = static_cast<std::size_t>(std::ceil(per_unit * config.horizon_factor - 1e-9));
  return Grid(config.horizon_factor * unit, steps);
}

Seed replicate_stream_seed(Seed master, std::size_t level, std::size_t pair) {
  return derive_seed(master, {level, pair});
}

double predicted_ruin_probability(const ExperimentConfig& config, double u) {
  if (config.prediction == PredictionMode::half_reduced)
    return std::min(1.0, ruin_prob_half_reduced(u, config.model));
  return ruin_prob_approx(u, config.model, config.pickands, config.piterbarg).value;
}

// ---------------------------------------------------------------------------

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw DomainError("ks_distance needs at least one sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double joint_cdf_distance(const std::vector<std::pair<double, double>>& samples,
                          const std::vector<double>& x_grid, const std::vector<double>& y_grid,
                          const std::function<double(double, double)>& target) {
  if (x_grid.empty() || y_grid.empty()) throw DomainError("joint_cdf_distance needs a nonempty grid");
  if (samples.empty()) throw DomainError("joint_cdf_distance needs at least one sample");
  auto sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> xs = x_grid;
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(samples.size());
  std::vector<double> prefix_y;
  std::size_t taken = 0;
  double d = 0.0;
  for (double x : xs) {
    while (taken < sorted.size() && sorted[taken].first <= x) {
      prefix_y.insert(std::upper_bound(prefix_y.begin(), prefix_y.end(), sorted[taken].second),
                      sorted[taken].second);
      ++taken;
    }
    for (double y : y_grid) {
      const auto count = std::upper_bound(prefix_y.begin(), prefix_y.end(), y) - prefix_y.begin();
      const double emp = static_cast<double>(count) / n;
      const double tgt = target ? target(x, y) : joint_limit_cdf(x, y);
      d = std::max(d, std::abs(emp - tgt));
    }
  }
  return d;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {lo};
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

// ---------------------------------------------------------------------------

ConditionalResult run_conditional_passage(const ExperimentConfig& config) {
  config.validate(true);
  ConditionalResult result;
  const double center_scale = t_tilde0(config.model);
  const double gamma = config.model.gamma;

  for (std::size_t level = 0; level < config.levels.size(); ++level) {
    const double u = config.levels[level];
    const double predicted = predicted_ruin_probability(config, u);
    const double needed = 10.0 / static_cast<double>(config.replicates);
    if (predicted < needed)
      throw TooRareError(fmt::format("u={:.6g}: predicted acceptance {:.6g} is below 10/replicates "
                                     "= {:.6g}; lower u or raise replicates",
                                     u, predicted, needed),
                         predicted);

    const Grid grid = passage_grid(config, u);
    const FbmSampler sampler(config.model.hurst, grid);
    const double dt = grid.step();
    const double c = config.model.drift;
    const std::size_t points = grid.size();
    const std::size_t pairs = (config.replicates + 1) / 2;
    const std::size_t chunks = (pairs + kPairsPerChunk - 1) / kPairsPerChunk;

    using Hit = std::pair<std::size_t, PassageRecord>;
    std::vector<std::vector<Hit>> slots(chunks);
    std::vector<double> drift(points);
    for (std::size_t i = 0; i < points; ++i) drift[i] = c * static_cast<double>(i) * dt;

    auto run_chunks = [&](std::size_t first, std::size_t count) {
      const auto order = chunk_order(first, count, config.shuffle_chunks);
      struct State {
        StationaryGaussianSampler::Workspace ws;
        std::vector<double> a, b;
      };
      parallel_for_with_state(
          count, config.threads,
          [&] { return State{sampler.make_workspace(), std::vector<double>(points), std::vector<double>(points)}; },
          [&](State& s, std::size_t i) {
            const std::size_t chunk = order[i];
            auto& out = slots[chunk];
            out.clear();
            const std::size_t p0 = chunk * kPairsPerChunk;
            const std::size_t p1 = std::min(pairs, p0 + kPairsPerChunk);
            for (std::size_t p = p0; p < p1; ++p) {
              NormalStream normals(replicate_stream_seed(config.seed, level, p));
              sampler.sample_pair(normals, s.ws, s.a, s.b);
              for (int k = 0; k < 2; ++k) {
                const std::size_t rep = 2 * p + static_cast<std::size_t>(k);
                if (rep >= config.replicates) break;
                auto& path = k == 0 ? s.a : s.b;
                for (std::size_t j = 0; j < points; ++j) path[j] -= drift[j];
                PassageRecord rec = reflected_passage(path, dt, gamma, u);
                if (rec.ruined) out.emplace_back(rep, rec);
              }
            }
          });
    };

    std::size_t done = 0;
    if (config.target_accepted == 0) {
      run_chunks(0, chunks);
      done = chunks;
    } else {
      std::size_t accepted = 0;
      while (done < chunks && accepted < config.target_accepted) {
        // Size the next round from the acceptance seen so far (or predicted).
        const double rate = done > 0 && accepted > 0
                                ? static_cast<double>(accepted) /
                                      static_cast<double>(2 * done * kPairsPerChunk)
                                : predicted;
        const double want = 1.1 * static_cast<double>(config.target_accepted - accepted) /
                            std::max(rate, 1e-12);
        auto round = static_cast<std::size_t>(
            std::ceil(want / static_cast<double>(2 * kPairsPerChunk)));
        round = std::clamp<std::size_t>(round, 1, chunks - done);
        run_chunks(done, round);
        for (std::size_t k = done; k < done + round; ++k) accepted += slots[k].size();
        done += round;
      }
    }

    LevelResult lr;
    LevelSummary& sm = lr.summary;
    sm.u = u;
    sm.replicates = std::min(config.replicates, 2 * done * kPairsPerChunk);
    sm.predicted_acceptance = predicted;
    sm.horizon = grid.t_max;
    sm.step = dt;
    const double a = a_scale(config.model, u);
    sm.step_over_a = dt / a;
    const double center = center_scale * u;
    for (std::size_t k = 0; k < done; ++k)
      for (const auto& [rep, rec] : slots[k]) {
        ConditionalSample cs;
        cs.raw = rec;
        cs.z1 = (*rec.tau1 - center) / a;
        cs.z2 = (*rec.tau2 - center) / a;
        if (*rec.tau2 > kHorizonCheck * grid.t_max) ++sm.horizon_violations;
        lr.samples.push_back(cs);
      }
    sm.accepted = lr.samples.size();
    sm.acceptance_rate = static_cast<double>(sm.accepted) / static_cast<double>(sm.replicates);

    if (sm.accepted == 0) {
      sm.ks_z1 = sm.ks_z2 = sm.mean_z1 = sm.sd_z1 = sm.med_gap = nan();
      result.warnings.push_back(fmt::format("u={:.6g}: no ruined path was observed", u));
    } else {
      std::vector<double> z1, z2, gap;
      MomentAccumulator m(1);
      for (const auto& s : lr.samples) {
        z1.push_back(s.z1);
        z2.push_back(s.z2);
        gap.push_back(s.z2 - s.z1);
        m.add(s.z1);
      }
      sm.ks_z1 = ks_distance(z1, limit_cdf_tau);
      sm.ks_z2 = ks_distance(z2, limit_cdf_tau);
      sm.mean_z1 = m.mean();
      sm.sd_z1 = sm.accepted > 1 ? std::sqrt(m.variance()) : nan();
      sm.med_gap = median(gap);
    }
    if (sm.accepted > 0 &&
        static_cast<double>(sm.horizon_violations) > kMaxViolationShare * static_cast<double>(sm.accepted)) {
      result.valid = false;
      result.warnings.push_back(fmt::format(
          "u={:.6g}: {} of {} ruined paths exceed u after {:.6g} of the horizon; campaign invalid", u,
          sm.horizon_violations, sm.accepted, kHorizonCheck));
    }
    if (config.target_accepted > 0 && sm.accepted < config.target_accepted)
      result.warnings.push_back(fmt::format("u={:.6g}: only {} accepted of the {} requested", u,
                                            sm.accepted, config.target_accepted));
    result.levels.push_back(std::move(lr));
  }
  return result;
}

// ---------------------------------------------------------------------------

RuinTable ruin_frequency_experiment(const ExperimentConfig& config) {
  config.validate(true);
  RuinTable table;
  const double u_min = config.levels.front();
  const double u_max = config.levels.back();
  const double step = passage_grid(config, u_min).step();
  const double horizon = config.horizon_factor * t_tilde0(config.model) * u_max;
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
  const Grid grid(static_cast<double>(steps) * step, steps);
  table.horizon = grid.t_max;
  table.step = step;

  const FbmSampler sampler(config.model.hurst, grid);
  const std::size_t points = grid.size();
  const std::size_t pairs = (config.replicates + 1) / 2;
  const std::size_t chunks = (pairs + kPairsPerChunk - 1) / kPairsPerChunk;
  std::vector<double> maxima(config.replicates);
  std::vector<double> drift(points);
  for (std::size_t i = 0; i < points; ++i) drift[i] = config.model.drift * grid.time(i);

  const auto order = chunk_order(0, chunks, config.shuffle_chunks);
  struct State {
    StationaryGaussianSampler::Workspace ws;
    std::vector<double> a, b;
  };
  parallel_for_with_state(
      chunks, config.threads,
      [&] { return State{sampler.make_workspace(), std::vector<double>(points), std::vector<double>(points)}; },
      [&](State& s, std::size_t i) {
        const std::size_t chunk = order[i];
        const std::size_t p0 = chunk * kPairsPerChunk;
        const std::size_t p1 = std::min(pairs, p0 + kPairsPerChunk);
        for (std::size_t p = p0; p < p1; ++p) {
          NormalStream normals(replicate_stream_seed(config.seed, 0, p));
          sampler.sample_pair(normals, s.ws, s.a, s.b);
          for (int k = 0; k < 2; ++k) {
            const std::size_t rep = 2 * p + static_cast<std::size_t>(k);
            if (rep >= config.replicates) break;
            auto& path = k == 0 ? s.a : s.b;
            for (std::size_t j = 0; j < points; ++j) path[j] -= drift[j];
            maxima[rep] = reflected_maximum(path, config.model.gamma);
          }
        }
      });

  const double n = static_cast<double>(config.replicates);
  for (double u : config.levels) {
    RuinRow row;
    row.u = u;
    row.replicates = config.replicates;
    row.ruined = static_cast<std::size_t>(
        std::count_if(maxima.begin(), maxima.end(), [u](double m) { return m > u; }));
    row.empirical_p = static_cast<double>(row.ruined) / n;
    row.std_error = std::sqrt(row.empirical_p * (1.0 - row.empirical_p) / n);
    row.predicted_p = predicted_ruin_probability(config, u);
    row.ratio = row.empirical_p / row.predicted_p;
    row.ratio_std_error = row.std_error / row.predicted_p;
    if (row.ruined < 10)
      table.warnings.push_back(fmt::format("u={:.6g}: only {} ruined paths", u, row.ruined));
    table.rows.push_back(row);
  }
  return table;
}

// ---------------------------------------------------------------------------

SeedBand seed_band(std::vector<double> values) {
  SeedBand b;
  b.values = std::move(values);
  if (b.values.empty()) return b;
  MomentAccumulator m(1);
  for (double v : b.values) m.add(v);
  b.mean = m.mean();
  const double half =
      b.values.size() > 1 ? 1.96 * std::sqrt(m.variance() / static_cast<double>(m.count())) : 0.0;
  b.lo = b.mean - half;
  b.hi = b.mean + half;
  return b;
}

std::vector<SeedStudyLevel> seed_study(const ExperimentConfig& config, std::size_t seeds) {
  if (seeds < 1) throw DomainError("seed study needs at least one seed");
  std::vector<std::vector<double>> ks(config.levels.size()), gap(config.levels.size()),
      acc(config.levels.size());
  std::vector<std::size_t> min_acc(config.levels.size(), std::numeric_limits<std::size_t>::max());
  std::size_t invalid = 0;
  for (std::size_t k = 0; k < seeds; ++k) {
    ExperimentConfig c = config;
    c.seed = derive_seed(config.seed, {0x5EEDu, k});
    const auto res = run_conditional_passage(c);
    if (!res.valid) ++invalid;
    for (std::size_t l = 0; l < res.levels.size(); ++l) {
      const auto& s = res.levels[l].summary;
      ks[l].push_back(s.ks_z1);
      gap[l].push_back(s.med_gap);
      acc[l].push_back(s.acceptance_rate);
      min_acc[l] = std::min(min_acc[l], s.accepted);
    }
  }
  std::vector<SeedStudyLevel> out;
  for (std::size_t l = 0; l < config.levels.size(); ++l)
    out.push_back({config.levels[l], seed_band(ks[l]), seed_band(gap[l]), seed_band(acc[l]), min_acc[l],
                   invalid});
  return out;
}

// ---------------------------------------------------------------------------

bool operator==(const LevelSummary& a, const LevelSummary& b) {
  auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
  return same(a.u, b.u) && a.replicates == b.replicates && a.accepted == b.accepted &&
         same(a.acceptance_rate, b.acceptance_rate) &&
         same(a.predicted_acceptance, b.predicted_acceptance) &&
         a.horizon_violations == b.horizon_violations && same(a.horizon, b.horizon) &&
         same(a.step, b.step) && same(a.step_over_a, b.step_over_a) && same(a.ks_z1, b.ks_z1) &&
         same(a.ks_z2, b.ks_z2) && same(a.mean_z1, b.mean_z1) && same(a.sd_z1, b.sd_z1) &&
         same(a.med_gap, b.med_gap);
}

nlohmann::json to_json(const LevelSummary& s) {
  return {{"u", s.u},
          {"replicates", s.replicates},
          {"accepted", s.accepted},
          {"acceptance_rate", s.acceptance_rate},
          {"predicted_acceptance", s.predicted_acceptance},
          {"horizon_violations", s.horizon_violations},
          {"horizon", s.horizon},
          {"step", s.step},
          {"step_over_a", s.step_over_a},
          {"ks_z1", s.ks_z1},
          {"ks_z2", s.ks_z2},
          {"mean_z1", s.mean_z1},
          {"sd_z1", s.sd_z1},
          {"med_gap", s.med_gap}};
}

LevelSummary level_summary_from_json(const nlohmann::json& j) {
  auto num = [&](const char* key) {
    const auto& v = j.at(key);
    return v.is_null() ? nan() : v.get<double>();
  };
  LevelSummary s;
  s.u = num("u");
  s.replicates = j.at("replicates").get<std::size_t>();
  s.accepted = j.at("accepted").get<std::size_t>();
  s.acceptance_rate = num("acceptance_rate");
  s.predicted_acceptance = num("predicted_acceptance");
  s.horizon_violations = j.at("horizon_violations").get<std::size_t>();
  s.horizon = num("horizon");
  s.step = num("step");
  s.step_over_a = num("step_over_a");
  s.ks_z1 = num("ks_z1");
  s.ks_z2 = num("ks_z2");
  s.mean_z1 = num("mean_z1");
  s.sd_z1 = num("sd_z1");
  s.med_gap = num("med_gap");
  return s;
}

nlohmann::json report_json(const ConditionalResult& result, const ExperimentConfig& config,
                           bool zero_timestamp) {
  nlohmann::json levels = nlohmann::json::array();
  nlohmann::json seeds = nlohmann::json::array();
  for (std::size_t l = 0; l < result.levels.size(); ++l) {
    levels.push_back(to_json(result.levels[l].summary));
    seeds.push_back({{"u", result.levels[l].summary.u},
                     {"first_stream_seed", replicate_stream_seed(config.seed, l, 0)}});
  }
  return {{"config", to_json(config)},
          {"master_seed", config.seed},
          {"stream_seeds", seeds},
          {"levels", levels},
          {"valid", result.valid},
          {"warnings", result.warnings},
          {"limitations",
           "the limit theorem states no convergence rate; judge KS and gap statistics by their "
           "trend across u, not by a tolerance at a fixed u"},
          {"code_version", code_version()},
          {"timestamp", zero_timestamp ? "1970-01-01T00:00:00Z" : timestamp_now()}};
}

nlohmann::json to_json(const RuinTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"u", r.u},
                    {"replicates", r.replicates},
                    {"ruined", r.ruined},
                    {"empirical_p", r.empirical_p},
                    {"std_error", r.std_error},
                    {"predicted_p", r.predicted_p},
                    {"ratio", r.ratio},
                    {"ratio_std_error", r.ratio_std_error}});
  return {{"rows", rows}, {"horizon", t.horizon}, {"step", t.step}, {"warnings", t.warnings}};
}

void write_report(const ConditionalResult& result, const ExperimentConfig& config,
                  const std::string& dir, const ReportOptions& options) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create directory " + root.string() + ": " + ec.message());

  std::string csv = "u,n,accepted,ks_z1,ks_z2,mean_z1,sd_z1,med_gap\n";
  for (const auto& l : result.levels) {
    const auto& s = l.summary;
    csv += fmt::format("{:.6g},{},{},{:.6g},{:.6g},{:.6g},{:.6g},{:.6g}\n", s.u, s.replicates,
                       s.accepted, s.ks_z1, s.ks_z2, s.mean_z1, s.sd_z1, s.med_gap);
  }
  write_file(root / "report.csv", csv);
  write_file(root / "report.json", report_json(result, config, options.zero_timestamp).dump(2) + "\n");

  if (options.write_samples) {
    for (const auto& l : result.levels) {
      std::string body = "z1,z2\n";
      for (const auto& s : l.samples) body += fmt::format("{:.17g},{:.17g}\n", s.z1, s.z2);
      write_file(root / fmt::format("samples_u{:g}.csv", l.summary.u), body);
    }
  }
}

} // namespace refbm
