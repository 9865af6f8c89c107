#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bpmn/io.hpp"
#include "bpmn/rng.hpp"
#include "bpmn/solver.hpp"
#include "bpmn/transform.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = BPMN_CLI_PATH;

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "bpmn_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("simulate writes the expected artifacts") {
  const fs::path dir = fresh_dir("simulate");
  const int rc = run("--seed 7 --output-dir " + dir.string() +
                     " simulate --p 10 --edge-prob 0.3 --n 1000 --burn-in 1000");
  CHECK(rc == 0);
  const bpmn::SampleMatrix x = bpmn::read_samples_csv(dir / "samples.csv");
  CHECK(x.n() == 1000);
  CHECK(x.p() == 10);
  CHECK(fs::exists(dir / "theta.json"));
  const json manifest = bpmn::read_json(dir / "simulate_manifest.json");
  CHECK(manifest.at("command") == "simulate");
  CHECK(manifest.at("outputs").size() == 2);
}

TEST_CASE("simulate without --p exits 2") {
  const fs::path dir = fresh_dir("simulate_bad");
  CHECK(run("--output-dir " + dir.string() + " simulate --n 100") == 2);
}

TEST_CASE("diagonal override drives the column mean") {
  const fs::path dir = fresh_dir("simulate_diag");
  const int rc = run("--seed 7 --output-dir " + dir.string() +
                     " simulate --p 10 --edge-prob 0.3 --n 1000 --diag 1=5");
  CHECK(rc == 0);
  const bpmn::SampleMatrix x = bpmn::read_samples_csv(dir / "samples.csv");
  CHECK(x.column_mean(0) > 0.9);
}

TEST_CASE("fit produces symmetric estimates and a manifest") {
  const fs::path dir = fresh_dir("fit");
  REQUIRE(run("--seed 3 --output-dir " + dir.string() +
              " simulate --p 6 --edge-prob 0.3 --n 400") == 0);
  const int rc = run("--output-dir " + dir.string() + " fit --method plg --input " +
                     (dir / "samples.csv").string() + " --lambda 0.05,0.02");
  CHECK(rc == 0);
  const json report = bpmn::read_json(dir / "fit_report.json");
  CHECK(report.at("method") == "plg");
  CHECK(report.at("fits").size() == 2);
  CHECK(fs::exists(dir / "coefficients.json"));
  CHECK(fs::exists(dir / "fit_manifest.json"));
}

TEST_CASE("fit rejects non-binary cells with coordinates") {
  const fs::path dir = fresh_dir("fit_badcsv");
  {
    std::ofstream out(dir / "bad.csv");
    out << "0,1,0\n1,2,1\n";
  }
  const std::string cmd = kCli + " --output-dir " + dir.string() +
                          " fit --input " + (dir / "bad.csv").string() +
                          " --lambda 0.1 2> " + (dir / "err.txt").string();
  const int status = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(status) == 2);
  const std::string err = slurp(dir / "err.txt");
  CHECK(err.find("row 2") != std::string::npos);
  CHECK(err.find("column 2") != std::string::npos);
}

TEST_CASE("fit on an empty csv exits 2") {
  const fs::path dir = fresh_dir("fit_empty");
  std::ofstream(dir / "empty.csv").close();
  CHECK(run("--output-dir " + dir.string() + " fit --input " +
            (dir / "empty.csv").string() + " --lambda 0.1") == 2);
}

TEST_CASE("impute-zero accepts missing cells") {
  const fs::path dir = fresh_dir("fit_impute");
  {
    std::ofstream out(dir / "holes.csv");
    out << "0,1,0\n1,,1\n0,NA,1\n1,0,0\n";
  }
  CHECK(run("--output-dir " + dir.string() + " fit --input " +
            (dir / "holes.csv").string() + " --lambda 0.2") == 2);
  CHECK(run("--output-dir " + dir.string() + " fit --impute-zero --input " +
            (dir / "holes.csv").string() + " --lambda 0.2") == 0);
}

TEST_CASE("select emits the instability curve; infeasible grid exits 3") {
  const fs::path dir = fresh_dir("select");
  REQUIRE(run("--seed 5 --output-dir " + dir.string() +
              " simulate --p 6 --edge-prob 0.3 --n 300") == 0);
  const int rc = run("--seed 5 --output-dir " + dir.string() +
                     " select --input " + (dir / "samples.csv").string() +
                     " --subsamples 6 --auto-grid 8,0.02");
  CHECK(rc == 0);
  CHECK(fs::exists(dir / "instability.csv"));
  const json selected = bpmn::read_json(dir / "selected.json");
  CHECK(selected.at("selected_lambda").get<double>() > 0.0);
  CHECK(selected.at("selected_lambda_nlr").get<double>() ==
        doctest::Approx(selected.at("selected_lambda").get<double>() / 2.0));

  // strict beta over a mid-range grid: infeasible
  const bpmn::SampleMatrix x = bpmn::read_samples_csv(dir / "samples.csv");
  const double lam_max =
      static_cast<double>(x.p()) * bpmn::lambda_max(bpmn::build_stacked(x));
  std::ostringstream grid;
  grid.precision(10);
  grid << 0.6 * lam_max << ',' << 0.4 * lam_max << ',' << 0.25 * lam_max;
  const int rc3 = run("--seed 5 --output-dir " + dir.string() +
                      " select --input " + (dir / "samples.csv").string() +
                      " --subsamples 8 --lambda " + grid.str() +
                      " --beta 0.0011 --subsample-size 80");
  CHECK(rc3 == 3);
}

TEST_CASE("roc on truth vs itself reports auc one") {
  const fs::path dir = fresh_dir("roc");
  REQUIRE(run("--seed 9 --output-dir " + dir.string() +
              " simulate --p 8 --edge-prob 0.3 --n 200") == 0);
  const int rc = run("--output-dir " + dir.string() + " roc --truth " +
                     (dir / "theta.json").string() + " --estimate " +
                     (dir / "theta.json").string());
  CHECK(rc == 0);
  const json auc = bpmn::read_json(dir / "auc.json");
  CHECK(auc.at("auc").get<double>() == doctest::Approx(1.0));
  CHECK(fs::exists(dir / "roc.csv"));
}

TEST_CASE("roc accepts a fit report in both modes") {
  const fs::path dir = fresh_dir("roc_fit");
  REQUIRE(run("--seed 11 --output-dir " + dir.string() +
              " simulate --p 8 --edge-prob 0.3 --n 500") == 0);
  REQUIRE(run("--output-dir " + dir.string() + " fit --method plg --input " +
              (dir / "samples.csv").string() + " --lambda 0.1,0.05,0.01") == 0);
  CHECK(run("--output-dir " + dir.string() + " roc --truth " +
            (dir / "theta.json").string() + " --estimate " +
            (dir / "fit_report.json").string() + " --lambda-index 2") == 0);
  CHECK(run("--output-dir " + dir.string() + " roc --truth " +
            (dir / "theta.json").string() + " --estimate " +
            (dir / "fit_report.json").string() + " --mode path") == 0);
}

TEST_CASE("bench below the repeat minimum exits 2") {
  const fs::path dir = fresh_dir("bench_bad");
  REQUIRE(run("--seed 13 --output-dir " + dir.string() +
              " simulate --p 5 --edge-prob 0.3 --n 200") == 0);
  CHECK(run("--output-dir " + dir.string() + " bench --input " +
            (dir / "samples.csv").string() + " --lambda 0.1 --repeats 1") == 2);
}

TEST_CASE("bench writes one record per method, lambda, repeat") {
  const fs::path dir = fresh_dir("bench");
  REQUIRE(run("--seed 13 --output-dir " + dir.string() +
              " simulate --p 5 --edge-prob 0.3 --n 200") == 0);
  const int rc = run("--output-dir " + dir.string() + " bench --input " +
                     (dir / "samples.csv").string() +
                     " --method plg,nlr --lambda 0.1,0.05 --repeats 3");
  CHECK(rc == 0);
  const std::string csv = slurp(dir / "bench.csv");
  std::size_t lines = 0;
  for (const char c : csv) lines += c == '\n';
  CHECK(lines == 1 + 2 * 2 * 3);  // header + methods * lambdas * repeats
}

TEST_CASE("identical seeds reproduce coefficient artifacts and manifests") {
  const fs::path dir_a = fresh_dir("repro_a");
  const fs::path dir_b = fresh_dir("repro_b");
  for (const fs::path& dir : {dir_a, dir_b}) {
    REQUIRE(run("--seed 21 --output-dir " + dir.string() +
                " simulate --p 6 --edge-prob 0.3 --n 300") == 0);
    REQUIRE(run("--seed 21 --output-dir " + dir.string() +
                " fit --method plg --input " + (dir / "samples.csv").string() +
                " --lambda 0.08,0.03") == 0);
  }
  CHECK(slurp(dir_a / "samples.csv") == slurp(dir_b / "samples.csv"));
  CHECK(slurp(dir_a / "theta.json") == slurp(dir_b / "theta.json"));
  CHECK(slurp(dir_a / "coefficients.json") == slurp(dir_b / "coefficients.json"));
  CHECK(slurp(dir_a / "simulate_manifest.json") ==
        slurp(dir_b / "simulate_manifest.json"));
  CHECK(slurp(dir_a / "fit_manifest.json") == slurp(dir_b / "fit_manifest.json"));
}

TEST_CASE("dump-design writes the coordinate file") {
  const fs::path dir = fresh_dir("dump");
  REQUIRE(run("--seed 23 --output-dir " + dir.string() +
              " simulate --p 4 --edge-prob 0.4 --n 50") == 0);
  CHECK(run("--output-dir " + dir.string() + " fit --input " +
            (dir / "samples.csv").string() +
            " --lambda 0.1 --dump-design design.txt") == 0);
  CHECK(fs::exists(dir / "design.txt"));
}

TEST_CASE("bench writes a medians summary") {
  const fs::path dir = fresh_dir("bench_summary");
  REQUIRE(run("--seed 31 --output-dir " + dir.string() +
              " simulate --p 5 --edge-prob 0.3 --n 200") == 0);
  REQUIRE(run("--output-dir " + dir.string() + " bench --input " +
              (dir / "samples.csv").string() +
              " --method plg --lambda 0.1,0.05 --repeats 3") == 0);
  const std::string csv = slurp(dir / "bench_summary.csv");
  std::size_t lines = 0;
  for (const char c : csv) lines += c == '\n';
  CHECK(lines == 1 + 2);  // header + one row per lambda
}

TEST_CASE("solver failure maps to exit 4") {
  const fs::path dir = fresh_dir("fit_separated");
  {
    std::ofstream out(dir / "sep.csv");
    bpmn::Rng rng(33);
    for (int i = 0; i < 120; ++i) {
      out << 1 << ',' << (rng.bernoulli(0.5) ? 1 : 0) << ','
          << (rng.bernoulli(0.5) ? 1 : 0) << '\n';
    }
  }
  CHECK(run("--output-dir " + dir.string() + " fit --method plg --input " +
            (dir / "sep.csv").string() + " --lambda 0.01 --max-outer 20") == 4);
}

TEST_CASE("select reports the internal selection level") {
  const fs::path dir = fresh_dir("select_internal");
  REQUIRE(run("--seed 37 --output-dir " + dir.string() +
              " simulate --p 6 --edge-prob 0.3 --n 300") == 0);
  // a grid reaching safely above lambda_max keeps the sparse end stable
  const bpmn::SampleMatrix x = bpmn::read_samples_csv(dir / "samples.csv");
  const double lm = 6.0 * bpmn::lambda_max(bpmn::build_stacked(x));
  std::ostringstream grid;
  grid.precision(10);
  grid << 2.5 * lm << ',' << 1.5 * lm << ',' << 0.8 * lm;
  REQUIRE(run("--seed 37 --output-dir " + dir.string() + " select --input " +
              (dir / "samples.csv").string() + " --subsamples 6 --lambda " +
              grid.str()) == 0);
  const json selected = bpmn::read_json(dir / "selected.json");
  CHECK(selected.at("selected_lambda_internal").get<double>() ==
        doctest::Approx(selected.at("selected_lambda").get<double>() / 6.0));
}

TEST_CASE("theta artifacts round-trip through json and csv") {
  const fs::path dir = fresh_dir("theta_roundtrip");
  bpmn::Rng rng(41);
  bpmn::ThetaMatrix theta(6);
  for (std::size_t s = 0; s < 6; ++s) {
    theta.set(s, s, rng.uniform(-1.0, 1.0));
    for (std::size_t t = s + 1; t < 6; ++t) {
      if (rng.bernoulli(0.5)) theta.set(s, t, rng.uniform(-1.0, 1.0));
    }
  }
  bpmn::write_theta_json(dir / "t.json", theta);
  CHECK(bpmn::read_theta_json(dir / "t.json") == theta);
  bpmn::write_theta_csv(dir / "t.csv", theta);
  CHECK(bpmn::read_theta_csv(dir / "t.csv") == theta);
}

TEST_CASE("positive-only edge list filters negative weights") {
  const fs::path dir = fresh_dir("edges_positive");
  REQUIRE(run("--seed 43 --output-dir " + dir.string() +
              " simulate --p 8 --edge-prob 0.4 --n 500") == 0);
  REQUIRE(run("--output-dir " + dir.string() + " fit --method plg --input " +
              (dir / "samples.csv").string() +
              " --lambda 0.01 --edges-csv edges.csv --positive-only") == 0);
  std::ifstream in(dir / "edges.csv");
  std::string line;
  std::getline(in, line);  // header
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    const auto last_comma = line.rfind(',');
    CHECK(std::stod(line.substr(last_comma + 1)) > 0.0);
    ++rows;
  }
  CHECK(rows > 0);
}
