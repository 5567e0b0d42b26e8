#include "refbm/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "refbm/asymptotics.hpp"
#include "refbm/constants.hpp"
#include "refbm/errors.hpp"
#include "refbm/experiment.hpp"
#include "refbm/fbm.hpp"
#include "refbm/field.hpp"
#include "refbm/reflected.hpp"

namespace refbm {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Globals {
  std::optional<Seed> seed;
  std::string out = ".";
  unsigned threads = 0;
  std::string config;
  bool quiet = false;
};

CLI::Validator interval(double lo, double hi, bool lo_open, bool hi_open) {
  const std::string desc = fmt::format("in {}{:g},{:g}{}", lo_open ? '(' : '[', lo, hi,
                                       hi_open ? ')' : ']');
  return CLI::Validator(
      [=](std::string& text) -> std::string {
        double v = 0.0;
        if (!CLI::detail::lexical_cast(text, v)) return fmt::format("'{}' is not a number", text);
        const bool ok_lo = lo_open ? v > lo : v >= lo;
        const bool ok_hi = hi_open ? v < hi : v <= hi;
        if (ok_lo && ok_hi) return {};
        return fmt::format("value {} not {}", text, desc);
      },
      desc);
}

const CLI::Validator& positive() {
  static const CLI::Validator v = interval(0.0, HUGE_VAL, true, true).description("> 0");
  return v;
}

std::string num(double v) { return fmt::format("{:.6g}", v); }

// Config file keys map to flags: key "steps_per_unit" is "--steps-per-unit".
std::string flag_for_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

bool flag_given(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

std::optional<std::string> config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

std::string scalar_token(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number() || v.is_boolean()) return v.dump();
  throw DomainError("config values must be scalars or arrays of scalars");
}

// Appends tokens for every config key whose flag is not on the command line.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  const auto path = config_path(args);
  if (!path) return args;
  std::ifstream in(*path);
  if (!in) throw IoError("cannot read config file " + *path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DomainError(fmt::format("config file {}: {}", *path, e.what()));
  }
  if (!j.is_object()) throw DomainError("config file " + *path + " must hold a JSON object");

  std::vector<std::string> extra;
  for (const auto& [key, value] : j.items()) {
    const std::string flag = flag_for_key(key);
    if (key == "config" || value.is_null() || flag_given(args, flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) extra.push_back(flag);
    } else if (value.is_array()) {
      extra.push_back(flag);
      for (const auto& item : value) extra.push_back(scalar_token(item));
    } else {
      extra.push_back(flag);
      extra.push_back(scalar_token(value));
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

fs::path output_file(const std::string& dir, const std::string& name) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create directory {}: {}", dir, ec.message()));
  return fs::path(dir) / name;
}

void write_text(const std::string& dir, const std::string& name, const std::string& text) {
  const auto path = output_file(dir, name);
  std::ofstream f(path);
  f << text;
  f.flush();
  if (!f) throw IoError("cannot write " + path.string());
}

void write_json(const std::string& dir, const std::string& name, const json& j) {
  write_text(dir, name, j.dump(2) + "\n");
}

std::optional<EstimateWithError> supplied(const std::optional<double>& value, double se) {
  if (!value) return std::nullopt;
  return EstimateWithError{*value, se, 0, EstimateMethod::monte_carlo};
}

// --- option groups ----------------------------------------------------------

struct ModelFlags {
  ModelParams params;
  std::optional<double> pickands;
  double pickands_se = 0.0;
  std::optional<double> piterbarg;
  double piterbarg_se = 0.0;
};

void add_model_flags(CLI::App* cmd, ModelFlags& m) {
  cmd->add_option("--hurst", m.params.hurst, "Hurst index H (dimensionless)")
      ->required()
      ->check(interval(0.0, 1.0, true, true));
  cmd->add_option("--gamma", m.params.gamma, "reflection strength gamma (dimensionless)")
      ->required()
      ->check(interval(0.0, 1.0, false, false));
  cmd->add_option("--c", m.params.drift, "drift c (reserve units per time unit)")
      ->required()
      ->check(positive());
}

void add_constant_flags(CLI::App* cmd, ModelFlags& m) {
  cmd->add_option("--pickands", m.pickands, "estimated H_{2H} when 2H is not 1 or 2 (dimensionless)")
      ->check(positive());
  cmd->add_option("--pickands-se", m.pickands_se, "standard error of --pickands")
      ->check(interval(0.0, HUGE_VAL, false, true));
  cmd->add_option("--piterbarg", m.piterbarg,
                  "estimated P_{2H}^{(1-gamma)/gamma} when 2H is not 1 or 2 (dimensionless)")
      ->check(positive());
  cmd->add_option("--piterbarg-se", m.piterbarg_se, "standard error of --piterbarg")
      ->check(interval(0.0, HUGE_VAL, false, true));
}

struct ExperimentFlags {
  ModelFlags model;
  std::vector<double> levels;
  double horizon_factor = 3.0;
  std::size_t steps_per_unit = 512;
  std::size_t replicates = 10000;
  std::size_t target_accepted = 0;
  std::string prediction = "asymptotic";
  std::optional<Seed> shuffle_chunks;
  bool samples = false;
  bool zero_timestamp = false;
};

void add_experiment_flags(CLI::App* cmd, ExperimentFlags& f) {
  add_model_flags(cmd, f.model);
  cmd->add_option("--levels", f.levels, "reserve levels u, ascending (reserve units)")
      ->required()
      ->check(positive());
  cmd->add_option("--horizon-factor", f.horizon_factor,
                  "simulated horizon in multiples of t_tilde0 * u (dimensionless)")
      ->capture_default_str()
      ->check(interval(1.0, HUGE_VAL, true, true));
  cmd->add_option("--steps-per-unit", f.steps_per_unit,
                  "grid steps per t_tilde0 * u time units (count)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--replicates", f.replicates, "simulated paths per level (count)")
      ->capture_default_str()
      ->check(interval(100.0, HUGE_VAL, false, true).description(">= 100"));
  cmd->add_option("--prediction", f.prediction,
                  "ruin probability used for predictions: asymptotic or half-reduced")
      ->capture_default_str()
      ->check(CLI::IsMember({"asymptotic", "half-reduced"}));
  add_constant_flags(cmd, f.model);
}

ExperimentConfig to_config(const ExperimentFlags& f, const Globals& g) {
  ExperimentConfig c;
  c.model = f.model.params;
  c.levels = f.levels;
  c.horizon_factor = f.horizon_factor;
  c.steps_per_unit = f.steps_per_unit;
  c.replicates = f.replicates;
  c.target_accepted = f.target_accepted;
  c.seed = g.seed.value_or(0);
  c.threads = g.threads;
  c.output = g.out;
  c.prediction = prediction_mode_from_string(f.prediction);
  c.pickands = supplied(f.model.pickands, f.model.pickands_se);
  c.piterbarg = supplied(f.model.piterbarg, f.model.piterbarg_se);
  c.shuffle_chunks = f.shuffle_chunks;
  return c;
}

void print_warnings(const std::vector<std::string>& warnings, const Globals& g,
                    std::ostream& err) {
  if (g.quiet) return;
  for (const auto& w : warnings) err << "warning: " << w << "\n";
}

// --- commands ---------------------------------------------------------------

int cmd_formulas(const ModelFlags& m, double u, std::ostream& out) {
  m.params.validate();
  const auto s = scaling(m.params, u);
  const auto ruin = ruin_prob_approx(u, m.params, supplied(m.pickands, m.pickands_se),
                                     supplied(m.piterbarg, m.piterbarg_se));
  const auto provenance = [](const EstimateWithError& e) {
    return e.method == EstimateMethod::closed_form ? std::string("closed-form")
                                                   : fmt::format("estimated, se {}", num(e.std_error));
  };
  const double a = m.params.gamma > 0.0 ? (1.0 - m.params.gamma) / m.params.gamma : HUGE_VAL;

  out << fmt::format("{:<18}{}\n", "t_tilde0", num(s.t_tilde0));
  out << fmt::format("{:<18}{}\n", "A(u)", num(s.a_of_u));
  out << fmt::format("{:<18}{}\n", "sigma_max", num(sigma_max(m.params)));
  out << fmt::format("{:<18}{}\n", "u_tilde", num(s.u_tilde));
  out << fmt::format("{:<18}{}  ({})\n", fmt::format("H_{}", num(2 * m.params.hurst)),
                     num(ruin.pickands.value), provenance(ruin.pickands));
  out << fmt::format("{:<18}{}  ({})\n",
                     fmt::format("P_{}^{}", num(2 * m.params.hurst), num(a)),
                     num(ruin.piterbarg.value), provenance(ruin.piterbarg));
  std::string line = fmt::format("{:<18}{}", "ruin_prob_approx", num(ruin.value));
  if (ruin.std_error > 0.0) line += fmt::format(" +/- {}", num(ruin.std_error));
  if (ruin.clamped) line += "  (clamped to 1)";
  out << line << "\n";
  if (m.params.hurst == 0.5 && m.params.gamma < 1.0)
    out << fmt::format("{:<18}{}\n", "half_reduced", num(ruin_prob_half_reduced(u, m.params)));
  return exit_ok;
}

int cmd_passage(const ExperimentFlags& f, const Globals& g, std::ostream& out,
                std::ostream& err) {
  const auto config = to_config(f, g);
  config.validate(true);
  const auto result = run_conditional_passage(config);
  write_report(result, config, g.out, {f.zero_timestamp, f.samples});
  print_warnings(result.warnings, g, err);
  if (!g.quiet) {
    out << fmt::format("{:>10} {:>10} {:>10} {:>10} {:>10} {:>10}\n", "u", "n", "accepted",
                       "ks_z1", "ks_z2", "med_gap");
    for (const auto& level : result.levels) {
      const auto& s = level.summary;
      out << fmt::format("{:>10} {:>10} {:>10} {:>10} {:>10} {:>10}\n", num(s.u), s.replicates,
                         s.accepted, num(s.ks_z1), num(s.ks_z2), num(s.med_gap));
    }
  }
  if (!result.valid) {
    err << "error: campaign invalid: too many ruined paths reached the horizon check; "
           "raise --horizon-factor\n";
    return exit_invalid_campaign;
  }
  return exit_ok;
}

int cmd_ruin(const ExperimentFlags& f, const Globals& g, std::ostream& out, std::ostream& err) {
  const auto config = to_config(f, g);
  config.validate(false);
  const auto table = ruin_frequency_experiment(config);

  std::string csv = "u,n,ruined,empirical_p,std_error,predicted_p,ratio,ratio_std_error\n";
  for (const auto& r : table.rows)
    csv += fmt::format("{},{},{},{},{},{},{},{}\n", num(r.u), r.replicates, r.ruined,
                       num(r.empirical_p), num(r.std_error), num(r.predicted_p), num(r.ratio),
                       num(r.ratio_std_error));
  json j = to_json(table);
  j["config"] = to_json(config);
  write_text(g.out, "ruin.csv", csv);
  write_json(g.out, "ruin.json", j);
  print_warnings(table.warnings, g, err);
  if (!g.quiet) {
    out << fmt::format("{:>10} {:>12} {:>12} {:>12} {:>10}\n", "u", "empirical", "predicted",
                       "ratio", "ratio_se");
    for (const auto& r : table.rows)
      out << fmt::format("{:>10} {:>12} {:>12} {:>12} {:>10}\n", num(r.u), num(r.empirical_p),
                         num(r.predicted_p), num(r.ratio), num(r.ratio_std_error));
  }
  return exit_ok;
}

struct ConstantFlags {
  double alpha = 1.0;
  std::optional<double> a;
  double hi = 4.0;
  std::vector<double> ladder;
  std::optional<std::size_t> replicates;
  std::optional<std::size_t> grid_intervals;
  bool no_mc = false;
};

int cmd_constants(const ConstantFlags& f, const Globals& g, std::ostream& out) {
  json j;
  std::optional<double> closed;
  std::optional<EstimateWithError> mc;
  if (f.a) {
    closed = piterbarg_closed(f.alpha, *f.a);
    j["constant"] = "piterbarg";
    j["alpha"] = f.alpha;
    j["a"] = *f.a;
  } else {
    closed = pickands_closed(f.alpha);
    j["constant"] = "pickands";
    j["alpha"] = f.alpha;
  }
  if (closed) j["closed_form"] = *closed;
  if (f.no_mc && !closed)
    throw DomainError(fmt::format("--alpha {} has no closed form; drop --no-mc", num(f.alpha)));

  if (!f.no_mc) {
    if (f.a) {
      ConstantSpec spec;
      spec.alpha = f.alpha;
      spec.a = f.a;
      spec.hi = f.hi;
      spec.mc.seed = *g.seed;
      spec.mc.threads = g.threads;
      if (f.replicates) spec.mc.replicates = *f.replicates;
      if (f.grid_intervals) spec.mc.grid_intervals = *f.grid_intervals;
      const auto est = piterbarg_truncated(spec);
      mc = est.estimate;
      j["monte_carlo"] = to_json(est);
    } else {
      auto budget = default_limit_budget(f.alpha);
      budget.seed = *g.seed;
      budget.threads = g.threads;
      if (f.replicates) budget.replicates = *f.replicates;
      if (f.grid_intervals) budget.grid_intervals = *f.grid_intervals;
      const auto ladder = f.ladder.empty() ? default_pickands_ladder(f.alpha) : f.ladder;
      const auto est = pickands_limit_estimate(f.alpha, ladder, budget);
      mc = est.estimate;
      j["monte_carlo"] = to_json(est);
    }
    j["estimate"] = mc->value;
    j["std_error"] = mc->std_error;
    if (closed && mc->std_error > 0.0) j["z_score"] = (mc->value - *closed) / mc->std_error;
  }
  write_json(g.out, "constants.json", j);

  if (!g.quiet) {
    out << fmt::format("{:<12}{}\n", "constant", j["constant"].get<std::string>());
    out << fmt::format("{:<12}{}\n", "alpha", num(f.alpha));
    if (f.a) out << fmt::format("{:<12}{}\n", "a", num(*f.a));
    if (closed) out << fmt::format("{:<12}{}\n", "closed_form", num(*closed));
    if (mc) {
      out << fmt::format("{:<12}{}\n", "estimate", num(mc->value));
      out << fmt::format("{:<12}{}\n", "std_error", num(mc->std_error));
      if (j.contains("z_score"))
        out << fmt::format("{:<12}{}\n", "z_score", num(j["z_score"].get<double>()));
    }
  }
  return exit_ok;
}

struct Thm21Flags {
  FieldSpec spec;
  std::optional<double> x;
  bool remark_b = false;
  std::vector<double> levels{2.5, 3.0, 3.5};
  FieldMc mc;
  std::optional<double> piterbarg;
  double piterbarg_se = 0.0;
  std::optional<double> pickands;
  double pickands_se = 0.0;
};

int cmd_thm21(Thm21Flags f, const Globals& g, std::ostream& out, std::ostream& err) {
  f.mc.seed = *g.seed;
  f.mc.threads = g.threads;
  const FieldConstants constants{supplied(f.piterbarg, f.piterbarg_se),
                                 supplied(f.pickands, f.pickands_se)};
  const auto report = verify_thm21(f.spec, f.x.value_or(0.0), f.levels, f.mc, constants,
                                   f.remark_b);

  std::string csv = "u,empirical_p,std_error,predicted_p,ratio,second_p,second_predicted_p,"
                    "union_p,grid_step,points\n";
  for (const auto& r : report.rows)
    csv += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", num(r.u), num(r.empirical_p),
                       num(r.std_error), num(r.predicted_p), num(r.ratio), num(r.second_p),
                       num(r.second_predicted_p), num(r.union_p), num(r.grid_step), r.points);
  write_text(g.out, "thm21.csv", csv);
  write_json(g.out, "thm21.json", to_json(report));
  print_warnings(report.warnings, g, err);
  if (!g.quiet) {
    out << fmt::format("{:>8} {:>12} {:>12} {:>12} {:>10}\n", "u", "empirical", "std_error",
                       "predicted", "ratio");
    for (const auto& r : report.rows)
      out << fmt::format("{:>8} {:>12} {:>12} {:>12} {:>10}\n", num(r.u), num(r.empirical_p),
                         num(r.std_error), num(r.predicted_p), num(r.ratio));
  }
  return exit_ok;
}

struct PiterbargFlags {
  PiterbargLemmaSetup setup;
  std::vector<double> levels{4.0};
  FieldMc mc;
};

int cmd_piterbarg(PiterbargFlags f, const Globals& g, std::ostream& out, std::ostream& err) {
  f.mc.seed = *g.seed;
  f.mc.threads = g.threads;
  const auto report = verify_piterbarg_lemma(f.setup, f.levels, f.mc);

  std::string csv = "u,level,empirical_p,std_error,predicted_p,predicted_std_error,ratio,"
                    "z_score,points\n";
  for (const auto& r : report.rows)
    csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", num(r.u), num(r.level), num(r.empirical_p),
                       num(r.std_error), num(r.predicted_p), num(r.predicted_std_error),
                       num(r.ratio), num(r.z_score), r.points);
  write_text(g.out, "piterbarg.csv", csv);
  write_json(g.out, "piterbarg.json", to_json(report));
  print_warnings(report.warnings, g, err);
  if (!g.quiet) {
    if (report.pickands_substituted)
      out << "note: b1 = 0, the s-axis constant is the Pickands constant H_alpha1[0,S]\n";
    out << fmt::format("{:>8} {:>12} {:>12} {:>12} {:>10} {:>8}\n", "u", "empirical",
                       "predicted", "combined_se", "ratio", "z");
    for (const auto& r : report.rows)
      out << fmt::format("{:>8} {:>12} {:>12} {:>12} {:>10} {:>8}\n", num(r.u),
                         num(r.empirical_p), num(r.predicted_p),
                         num(std::hypot(r.std_error, r.predicted_std_error)), num(r.ratio),
                         num(r.z_score));
  }
  return exit_ok;
}

struct PathFlags {
  ModelFlags model;
  double horizon = 10.0;
  std::size_t steps = 1000;
};

int cmd_sample_path(const PathFlags& f, const Globals& g, std::ostream& out) {
  f.model.params.validate();
  const Grid grid(f.horizon, f.steps);
  const auto input = sample_drifted_input(f.model.params, grid, *g.seed);
  const auto reflected = reflect(input, f.model.params.gamma);

  std::string csv = "t,x,y,w\n";
  double w_max = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid.time(i);
    const double y = input.values[i];
    csv += fmt::format("{},{},{},{}\n", num(t), num(y + f.model.params.drift * t), num(y),
                       num(reflected.values[i]));
    w_max = std::max(w_max, reflected.values[i]);
  }
  write_text(g.out, "path.csv", csv);
  if (!g.quiet)
    out << fmt::format("wrote {} points to {}, max w {}\n", grid.size(),
                       (fs::path(g.out) / "path.csv").string(), num(w_max));
  return exit_ok;
}

} // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and asymptotics of gamma-reflected fractional Brownian motion",
               "refbm"};
  app.set_version_flag("--version", code_version());
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "master seed (unsigned 64-bit integer)");
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads, 0 = all cores (count)")
      ->capture_default_str();
  app.add_option("--config", g.config,
                 "JSON file whose keys mirror the flags; flags given on the command line win");
  app.add_flag("--quiet", g.quiet, "suppress tables and warnings on the terminal");

  ModelFlags formulas;
  double formulas_u = 0.0;
  auto* c_formulas = app.add_subcommand("formulas", "evaluate normalizers and the ruin approximation");
  add_model_flags(c_formulas, formulas);
  c_formulas->add_option("--u", formulas_u, "reserve level u (reserve units)")
      ->required()
      ->check(positive());
  add_constant_flags(c_formulas, formulas);

  ExperimentFlags passage;
  auto* c_passage =
      app.add_subcommand("passage", "conditional passage times by rejection; writes report.*");
  add_experiment_flags(c_passage, passage);
  c_passage->add_option("--target-accepted", passage.target_accepted,
                        "stop a level after this many ruined paths, 0 = off (count)")
      ->capture_default_str();
  c_passage->add_flag("--samples", passage.samples, "also write samples_u<level>.csv");
  c_passage->add_flag("--zero-timestamp", passage.zero_timestamp,
                      "write a fixed timestamp into report.json");
  c_passage->add_option("--shuffle-chunks", passage.shuffle_chunks,
                        "process work chunks in an order permuted by this seed (testing)");

  ExperimentFlags ruin;
  auto* c_ruin = app.add_subcommand(
      "ruin-freq", "empirical ruin frequencies against the prediction; writes ruin.*");
  add_experiment_flags(c_ruin, ruin);

  ConstantFlags constants;
  auto* c_constants = app.add_subcommand(
      "constants", "Pickands or Piterbarg constant, closed form and Monte Carlo; writes constants.json");
  c_constants->add_option("--alpha", constants.alpha, "index alpha (dimensionless)")
      ->required()
      ->check(interval(0.0, 2.0, true, false));
  c_constants->add_option("--a", constants.a,
                          "Piterbarg weight a; omit for the Pickands constant (dimensionless)")
      ->check(positive());
  c_constants->add_option("--hi", constants.hi,
                          "upper end of the Piterbarg interval [0, hi] (time units)")
      ->capture_default_str()
      ->check(positive());
  c_constants->add_option("--ladder", constants.ladder,
                          "interval lengths T of the Pickands limit fit (time units)")
      ->check(positive());
  c_constants->add_option("--replicates", constants.replicates, "Monte Carlo paths; default depends on the constant (count)")
      ->check(CLI::PositiveNumber);
  c_constants->add_option("--grid-intervals", constants.grid_intervals,
                          "coarse grid intervals across each interval; default depends on the constant (count)")
      ->check(CLI::PositiveNumber);
  c_constants->add_flag("--no-mc", constants.no_mc, "closed form only");

  auto* c_field = app.add_subcommand("field", "Gaussian field experiments");
  c_field->require_subcommand(1);

  Thm21Flags thm21;
  auto* c_thm21 = c_field->add_subcommand(
      "verify-thm21", "sup of the canonical field over the shrinking regions; writes thm21.*");
  c_thm21->add_option("--beta", thm21.spec.beta, "exponent beta (dimensionless)")
      ->capture_default_str()
      ->check(interval(0.0, 2.0, true, false));
  c_thm21->add_option("--b1", thm21.spec.b1, "variance coefficient in s (dimensionless)")
      ->capture_default_str();
  c_thm21->add_option("--b2", thm21.spec.b2, "variance coefficient in t (dimensionless)")
      ->capture_default_str();
  c_thm21->add_option("--b3", thm21.spec.b3, "mixed variance coefficient (dimensionless)")
      ->capture_default_str();
  c_thm21->add_option("--a1", thm21.spec.a1, "correlation coefficient in s (dimensionless)")
      ->capture_default_str();
  c_thm21->add_option("--a2", thm21.spec.a2, "correlation coefficient in t (dimensionless)")
      ->capture_default_str();
  c_thm21->add_option("--t0", thm21.spec.t0, "location of the variance maximum in t (time units)")
      ->capture_default_str();
  auto* x_opt = c_thm21->add_option("--x", thm21.x,
                                    "region offset x; the first region ends at t0 + x/u (default 0)");
  c_thm21->add_flag("--remark-b", thm21.remark_b, "use x = ln u and drop the side factor")
      ->excludes(x_opt);
  c_thm21->add_option("--levels", thm21.levels, "levels u (field units)")
      ->capture_default_str()
      ->check(interval(1.0, HUGE_VAL, true, true));
  c_thm21->add_option("--replicates", thm21.mc.replicates, "field draws per level (count)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  c_thm21->add_option("--points-per-cell", thm21.mc.points_per_cell,
                      "grid points per u^{-2/beta} in each axis (count)")
      ->capture_default_str()
      ->check(positive());
  c_thm21->add_option("--budget", thm21.mc.budget, "maximum grid points (count)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  c_thm21->add_option("--piterbarg", thm21.piterbarg,
                      "estimated P_beta^{b1/a1} when beta is not 1 or 2 (dimensionless)")
      ->check(positive());
  c_thm21->add_option("--piterbarg-se", thm21.piterbarg_se, "standard error of --piterbarg");
  c_thm21->add_option("--pickands", thm21.pickands,
                      "estimated H_beta when beta is not 1 or 2 (dimensionless)")
      ->check(positive());
  c_thm21->add_option("--pickands-se", thm21.pickands_se, "standard error of --pickands");

  PiterbargFlags pit;
  auto* c_pit = c_field->add_subcommand(
      "verify-piterbarg",
      "field exceedance over a scaled rectangle against a product of constants; writes piterbarg.*");
  c_pit->add_option("--alpha1", pit.setup.alpha1, "exponent in s (dimensionless)")
      ->capture_default_str()
      ->check(interval(0.0, 2.0, true, false));
  c_pit->add_option("--alpha2", pit.setup.alpha2, "exponent in t (dimensionless)")
      ->capture_default_str()
      ->check(interval(0.0, 2.0, true, false));
  c_pit->add_option("--b1", pit.setup.b1, "weight coefficient in s, 0 allowed (dimensionless)")
      ->capture_default_str()
      ->check(interval(0.0, HUGE_VAL, false, true));
  c_pit->add_option("--b2", pit.setup.b2, "weight coefficient in t (dimensionless)")
      ->capture_default_str()
      ->check(positive());
  c_pit->add_option("--s-len", pit.setup.s_len, "scaled s extent S (scaled time units)")
      ->capture_default_str()
      ->check(positive());
  c_pit->add_option("--t-lo", pit.setup.t_lo, "scaled t lower end T1 (scaled time units)")
      ->capture_default_str();
  c_pit->add_option("--t-hi", pit.setup.t_hi, "scaled t upper end T2 (scaled time units)")
      ->capture_default_str();
  c_pit->add_option("--scaled-step", pit.setup.scaled_step,
                    "lattice step in both scaled axes (scaled time units)")
      ->capture_default_str()
      ->check(positive());
  c_pit->add_flag("--shifted-level", pit.setup.shifted_level, "use the level u + 1/u");
  c_pit->add_option("--constant-replicates", pit.setup.constant_replicates,
                    "Monte Carlo paths for each constant (count)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  c_pit->add_option("--levels", pit.levels, "levels u (field units)")
      ->capture_default_str()
      ->check(positive());
  c_pit->add_option("--replicates", pit.mc.replicates, "field draws per level (count)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  c_pit->add_option("--budget", pit.mc.budget, "maximum grid points (count)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  PathFlags path;
  auto* c_path = app.add_subcommand("sample-path", "one input and reflected path; writes path.csv");
  add_model_flags(c_path, path.model);
  c_path->add_option("--horizon", path.horizon, "time horizon (time units)")
      ->capture_default_str()
      ->check(positive());
  c_path->add_option("--steps", path.steps, "grid steps (count)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  const std::string globals_help =
      "Global flags:\n"
      "  --seed UINT     master seed (unsigned 64-bit integer); required unless deterministic\n"
      "  --out DIR       output directory [.]\n"
      "  --threads UINT  worker threads, 0 = all cores (count) [0]\n"
      "  --config PATH   JSON file whose keys mirror the flags; flags given here win\n"
      "  --quiet         suppress tables and warnings on the terminal";
  for (auto* cmd : {c_formulas, c_passage, c_ruin, c_constants, c_field, c_thm21, c_pit, c_path})
    cmd->footer(globals_help);

  try {
    std::vector<std::string> args = merge_config(raw_args);
    std::reverse(args.begin(), args.end());
    try {
      app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
      return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
    }

    const bool stochastic = c_passage->parsed() || c_ruin->parsed() || c_field->parsed() ||
                            c_path->parsed() || (c_constants->parsed() && !constants.no_mc);
    if (stochastic && !g.seed) {
      err << "error: --seed is required for this subcommand\n";
      return exit_usage;
    }

    if (c_formulas->parsed()) return cmd_formulas(formulas, formulas_u, out);
    if (c_passage->parsed()) return cmd_passage(passage, g, out, err);
    if (c_ruin->parsed()) return cmd_ruin(ruin, g, out, err);
    if (c_constants->parsed()) return cmd_constants(constants, g, out);
    if (c_thm21->parsed()) return cmd_thm21(thm21, g, out, err);
    if (c_pit->parsed()) return cmd_piterbarg(pit, g, out, err);
    if (c_path->parsed()) return cmd_sample_path(path, g, out);
    return exit_usage;
  } catch (const TooRareError& e) {
    err << "error: " << e.what() << "\n";
    return exit_infeasible;
  } catch (const BudgetError& e) {
    err << "error: " << e.what() << "\n";
    return exit_infeasible;
  } catch (const SamplingError& e) {
    err << "error: " << e.what() << "\n";
    return exit_infeasible;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return exit_io;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  }
}

} // namespace refbm
