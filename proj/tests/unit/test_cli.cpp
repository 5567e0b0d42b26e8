#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "refbm/cli.hpp"

using namespace refbm;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("refbm_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

const std::vector<std::string> kModel{"--hurst", "0.5", "--gamma", "0.5", "--c", "1"};

std::vector<std::string> with_model(std::vector<std::string> head, std::vector<std::string> tail = {}) {
  head.insert(head.end(), kModel.begin(), kModel.end());
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

} // namespace

TEST_CASE("formulas prints the normalizers") {
  const auto r = run(with_model({"formulas"}, {"--u", "4"}));
  REQUIRE(r.code == exit_ok);
  CHECK(r.out == slurp(fs::path(REFBM_GOLDEN_DIR) / "formulas_h05_u4.txt"));
}

TEST_CASE("usage and domain errors exit with 1") {
  const auto missing = run(with_model({"formulas"}));
  CHECK(missing.code == exit_usage);
  CHECK(missing.err.find("--u") != std::string::npos);

  const auto bad = run({"formulas", "--hurst", "1.2", "--gamma", "0.5", "--c", "1", "--u", "4"});
  CHECK(bad.code == exit_usage);
  CHECK(bad.err.find("--hurst") != std::string::npos);

  CHECK(run({}).code == exit_usage);
  CHECK(run({"nonsense"}).code == exit_usage);
  CHECK(run({"formulas", "--hurst", "0.3", "--gamma", "0.5", "--c", "1", "--u", "4"}).code ==
        exit_usage);
  CHECK(run({"field", "verify-thm21", "--seed", "1", "--x", "0", "--remark-b"}).code == exit_usage);
  CHECK(run({"field", "--seed", "1"}).code == exit_usage);
}

TEST_CASE("stochastic commands require a seed") {
  const auto r = run(with_model({"sample-path"}));
  CHECK(r.code == exit_usage);
  CHECK(r.err.find("--seed") != std::string::npos);
  CHECK(run({"constants", "--alpha", "1", "--no-mc", "--out", scratch_dir("noseed").string()}).code ==
        exit_ok);
}

TEST_CASE("help lists every flag with units") {
  const std::vector<std::pair<std::vector<std::string>, std::string>> cases{
      {{"--help"}, "help_main.txt"},
      {{"formulas", "--help"}, "help_formulas.txt"},
      {{"passage", "--help"}, "help_passage.txt"},
      {{"ruin-freq", "--help"}, "help_ruin_freq.txt"},
      {{"constants", "--help"}, "help_constants.txt"},
      {{"field", "verify-thm21", "--help"}, "help_field_thm21.txt"},
      {{"field", "verify-piterbarg", "--help"}, "help_field_piterbarg.txt"},
      {{"sample-path", "--help"}, "help_sample_path.txt"},
  };
  for (const auto& [args, file] : cases) {
    CAPTURE(file);
    const auto r = run(args);
    CHECK(r.code == exit_ok);
    CHECK(r.out == slurp(fs::path(REFBM_GOLDEN_DIR) / file));
  }
}

TEST_CASE("passage writes reports, deterministically") {
  const auto a = scratch_dir("passage_a");
  const auto b = scratch_dir("passage_b");
  const std::vector<std::string> tail{"--levels", "1", "1.5", "--replicates", "1000",
                                      "--horizon-factor", "10", "--steps-per-unit", "32",
                                      "--seed", "5", "--zero-timestamp"};
  auto args = with_model({"passage"}, tail);
  args.insert(args.end(), {"--out", a.string()});
  const auto ra = run(args);
  REQUIRE(ra.code == exit_ok);
  args.back() = b.string();
  args.insert(args.end(), {"--threads", "1", "--shuffle-chunks", "3", "--quiet"});
  REQUIRE(run(args).code == exit_ok);
  const auto csv = slurp(a / "report.csv");
  CHECK(csv == slurp(b / "report.csv"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(ra.out.find("accepted") != std::string::npos);
}

TEST_CASE("passage exit codes: too rare, invalid, io") {
  const auto dir = scratch_dir("passage_codes");
  const auto rare = run(with_model({"passage"}, {"--levels", "9", "--replicates", "1000", "--seed", "1",
                                                 "--out", dir.string()}));
  CHECK(rare.code == exit_infeasible);
  CHECK(rare.err.find("predicted acceptance") != std::string::npos);

  const auto invalid = run(with_model({"passage"}, {"--levels", "1", "--replicates", "1000", "--seed", "1",
                                                    "--horizon-factor", "1.2", "--steps-per-unit", "32",
                                                    "--out", dir.string(), "--quiet"}));
  CHECK(invalid.code == exit_invalid_campaign);
  CHECK(fs::exists(dir / "report.csv"));

  const auto io = run(with_model({"passage"}, {"--levels", "1", "--replicates", "1000", "--seed", "1",
                                               "--horizon-factor", "10", "--steps-per-unit", "32",
                                               "--out", "/proc/refbm_no_such_dir"}));
  CHECK(io.code == exit_io);
  CHECK(run({"passage", "--config", "/nonexistent/cfg.json"}).code == exit_io);
}

TEST_CASE("config file keys mirror flags and flags win") {
  const auto dir = scratch_dir("config");
  fs::create_directories(dir);
  const auto cfg = dir / "cfg.json";
  {
    std::ofstream f(cfg);
    f << R"({"hurst": 0.5, "gamma": 0.5, "c": 1, "levels": [1, 1.5], "replicates": 1000,
             "horizon_factor": 14, "steps_per_unit": 32, "seed": 5, "quiet": true})";
  }
  const auto out1 = dir / "one";
  const auto r1 = run({"passage", "--config", cfg.string(), "--out", out1.string(), "--zero-timestamp"});
  REQUIRE(r1.code == exit_ok);
  CHECK(r1.out.empty());

  const auto flags = scratch_dir("config_flags");
  auto args = with_model({"passage"}, {"--levels", "1", "1.5", "--replicates", "1000", "--horizon-factor",
                                       "14", "--steps-per-unit", "32", "--seed", "5", "--zero-timestamp",
                                       "--out", flags.string()});
  REQUIRE(run(args).code == exit_ok);
  CHECK(slurp(out1 / "report.csv") == slurp(flags / "report.csv"));

  const auto out2 = dir / "two";
  REQUIRE(run({"passage", "--config", cfg.string(), "--seed", "6", "--out", out2.string()}).code == exit_ok);
  CHECK(slurp(out1 / "report.csv") != slurp(out2 / "report.csv"));
  const auto j = nlohmann::json::parse(slurp(out2 / "report.json"));
  CHECK(j["master_seed"] == 6);

  {
    std::ofstream f(cfg);
    f << R"({"bogus_key": 1})";
  }
  CHECK(run({"passage", "--config", cfg.string()}).code == exit_usage);
}

TEST_CASE("constants command") {
  const auto dir = scratch_dir("constants");
  const auto one = run({"constants", "--alpha", "1", "--no-mc", "--out", dir.string()});
  REQUIRE(one.code == exit_ok);
  auto j = nlohmann::json::parse(slurp(dir / "constants.json"));
  CHECK(j["closed_form"] == 1.0);

  const auto two = run({"constants", "--alpha", "2", "--a", "1", "--seed", "3", "--replicates", "20000",
                        "--grid-intervals", "256", "--out", dir.string()});
  REQUIRE(two.code == exit_ok);
  j = nlohmann::json::parse(slurp(dir / "constants.json"));
  CHECK(j["closed_form"].get<double>() == doctest::Approx(1.207107).epsilon(1e-6));
  CHECK(std::abs(j["estimate"].get<double>() - 1.2071067811865475) < 3.0 * j["std_error"].get<double>());

  const auto rough = run({"constants", "--alpha", "1.5", "--seed", "3", "--replicates", "500",
                          "--grid-intervals", "64", "--out", dir.string()});
  REQUIRE(rough.code == exit_ok);
  j = nlohmann::json::parse(slurp(dir / "constants.json"));
  CHECK_FALSE(j.contains("closed_form"));
  CHECK(j.contains("estimate"));
  CHECK(run({"constants", "--alpha", "1.5", "--no-mc"}).code == exit_usage);
  CHECK(run({"constants", "--alpha", "2.5", "--no-mc"}).code == exit_usage);
}

TEST_CASE("field commands write ratio ladders") {
  const auto dir = scratch_dir("field");
  const auto t = run({"field", "verify-thm21", "--seed", "2", "--replicates", "500", "--levels", "2", "2.5",
                      "--points-per-cell", "2", "--out", dir.string()});
  REQUIRE(t.code == exit_ok);
  const auto csv = slurp(dir / "thm21.csv");
  CHECK(csv.rfind("u,empirical_p,std_error,predicted_p,ratio", 0) == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "thm21.json"))["rows"].size() == 2);

  const auto p = run({"field", "verify-piterbarg", "--seed", "2", "--b1", "0", "--replicates", "500",
                      "--constant-replicates", "500", "--scaled-step", "0.25", "--levels", "3",
                      "--out", dir.string()});
  REQUIRE(p.code == exit_ok);
  CHECK(p.out.find("Pickands") != std::string::npos);
  CHECK(nlohmann::json::parse(slurp(dir / "piterbarg.json"))["pickands_substituted"] == true);
}

TEST_CASE("sample-path and ruin-freq") {
  const auto dir = scratch_dir("path");
  REQUIRE(run(with_model({"sample-path"}, {"--seed", "1", "--steps", "10", "--out", dir.string()})).code ==
          exit_ok);
  const auto csv = slurp(dir / "path.csv");
  CHECK(csv.rfind("t,x,y,w\n0,0,0,0\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 12);

  const auto r = run(with_model({"ruin-freq"}, {"--levels", "1", "2", "--replicates", "1000", "--seed", "1",
                                                "--steps-per-unit", "32", "--out", dir.string()}));
  REQUIRE(r.code == exit_ok);
  const auto first = slurp(dir / "ruin.csv");
  CHECK(first.rfind("u,n,ruined,empirical_p", 0) == 0);
  run(with_model({"ruin-freq"}, {"--levels", "1", "2", "--replicates", "1000", "--seed", "1",
                                 "--steps-per-unit", "32", "--out", dir.string(), "--threads", "1"}));
  CHECK(slurp(dir / "ruin.csv") == first);
}
