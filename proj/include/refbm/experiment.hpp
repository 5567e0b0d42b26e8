#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "refbm/estimate.hpp"
#include "refbm/fbm.hpp"
#include "refbm/reflected.hpp"

namespace refbm {

/// How the ruin probability used for predictions and feasibility is computed.
enum class PredictionMode {
  asymptotic,    ///< ruin_prob_approx
  half_reduced,  ///< exp(-2cu) / (1 - gamma), H = 1/2 only
};

std::string to_string(PredictionMode m);
PredictionMode prediction_mode_from_string(const std::string& s);

struct ExperimentConfig {
  ModelParams model;
  std::vector<double> levels;
  /// Simulated horizon is horizon_factor * t_tilde0 * u.
  double horizon_factor = 3.0;
  /// Grid steps per t_tilde0 * u; refined automatically so step / A(u) <= 0.02.
  std::size_t steps_per_unit = 512;
  /// Replicates per level (an upper bound when target_accepted is set).
  std::size_t replicates = 10000;
  /// Stop a level once this many ruined paths were collected (0 = off).
  std::size_t target_accepted = 0;
  Seed seed = 1;
  unsigned threads = 0;
  std::string output;
  PredictionMode prediction = PredictionMode::asymptotic;
  std::optional<EstimateWithError> pickands;   ///< H_{2H} when 2H is not 1 or 2
  std::optional<EstimateWithError> piterbarg;  ///< P_{2H}^{(1-gamma)/gamma}
  /// Testing aid: process work chunks in a permuted order.
  std::optional<Seed> shuffle_chunks;

  /// levels ascending and positive, replicates >= 100; `conditional` also
  /// requires gamma in (0,1).
  void validate(bool conditional = true) const;
};

nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Standardized passage times of one ruined path.
struct ConditionalSample {
  double z1 = 0.0;
  double z2 = 0.0;
  PassageRecord raw;
};

struct LevelSummary {
  double u = 0.0;
  std::size_t replicates = 0;
  std::size_t accepted = 0;
  double acceptance_rate = 0.0;
  double predicted_acceptance = 0.0;
  std::size_t horizon_violations = 0;
  double horizon = 0.0;
  double step = 0.0;
  double step_over_a = 0.0;
  double ks_z1 = 0.0;
  double ks_z2 = 0.0;
  double mean_z1 = 0.0;
  double sd_z1 = 0.0;
  double med_gap = 0.0;  ///< median of z2 - z1
};

bool operator==(const LevelSummary& a, const LevelSummary& b);

struct LevelResult {
  LevelSummary summary;
  std::vector<ConditionalSample> samples;
};

struct ConditionalResult {
  std::vector<LevelResult> levels;
  bool valid = true;  ///< false when more than 1% of ruined paths hit the horizon check
  std::vector<std::string> warnings;
};

/// Simulation grid for level u: horizon K t_tilde0 u with at least
/// steps_per_unit steps per t_tilde0 u, refined so that step / A(u) <= 0.02.
Grid passage_grid(const ExperimentConfig& config, double u);

/// Stream seed of replicate pair `pair` at level index `level`; replicates
/// 2 pair and 2 pair + 1 are the two paths of that draw.
Seed replicate_stream_seed(Seed master, std::size_t level, std::size_t pair);

/// Predicted ruin probability under config.prediction (clamped to 1).
double predicted_ruin_probability(const ExperimentConfig& config, double u);

/// Conditional-on-ruin passage times by rejection. Throws TooRareError when
/// the predicted acceptance is below 10 / replicates.
ConditionalResult run_conditional_passage(const ExperimentConfig& config);

/// Two-sided Kolmogorov-Smirnov distance to `cdf`. Throws on empty input.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

/// max |F_emp(x, y) - target(x, y)| over the grid; target defaults to
/// Phi(min(x, y)). Throws on an empty grid or sample.
double joint_cdf_distance(const std::vector<std::pair<double, double>>& samples,
                          const std::vector<double>& x_grid, const std::vector<double>& y_grid,
                          const std::function<double(double, double)>& target = {});

/// Evenly spaced grid lo, ..., hi with n points.
std::vector<double> linear_grid(double lo, double hi, std::size_t n);

struct RuinRow {
  double u = 0.0;
  std::size_t replicates = 0;
  std::size_t ruined = 0;
  double empirical_p = 0.0;
  double std_error = 0.0;
  double predicted_p = 0.0;
  double ratio = 0.0;
  double ratio_std_error = 0.0;
};

struct RuinTable {
  std::vector<RuinRow> rows;
  double horizon = 0.0;
  double step = 0.0;
  std::vector<std::string> warnings;
};

/// Ruin frequencies with common random numbers: every path is simulated once
/// on a common grid (horizon K t_tilde0 u_max, step fixed by u_min) and its
/// maximum is compared with every level, so frequencies are pathwise
/// nonincreasing in u.
RuinTable ruin_frequency_experiment(const ExperimentConfig& config);

/// Mean and 95% band of a statistic across master seeds.
struct SeedBand {
  std::vector<double> values;
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

SeedBand seed_band(std::vector<double> values);

struct SeedStudyLevel {
  double u = 0.0;
  SeedBand ks_z1;
  SeedBand med_gap;
  SeedBand acceptance;
  std::size_t min_accepted = 0;
  std::size_t invalid_runs = 0;  ///< seeds whose campaign failed the horizon check
};

/// Repeats run_conditional_passage over master seeds derived from config.seed.
std::vector<SeedStudyLevel> seed_study(const ExperimentConfig& config, std::size_t seeds);

struct ReportOptions {
  bool zero_timestamp = false;
  bool write_samples = false;
};

/// Writes report.csv, report.json and optionally samples_u<value>.csv into
/// `dir` (created if missing). Throws IoError with the offending path.
void write_report(const ConditionalResult& result, const ExperimentConfig& config,
                  const std::string& dir, const ReportOptions& options = {});

nlohmann::json report_json(const ConditionalResult& result, const ExperimentConfig& config,
                           bool zero_timestamp);
nlohmann::json to_json(const LevelSummary& s);
LevelSummary level_summary_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RuinTable& t);

/// Code version recorded in reports.
std::string code_version();

} // namespace refbm
