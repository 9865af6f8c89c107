// Command-line front end: simulate, fit, select, roc, bench.
//
// Exit codes: 0 success, 2 usage/validation, 3 infeasible configuration,
// 4 solver failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bpmn/estimators.hpp"
#include "bpmn/eval.hpp"
#include "bpmn/io.hpp"
#include "bpmn/model.hpp"
#include "bpmn/rng.hpp"
#include "bpmn/sampling.hpp"
#include "bpmn/selection.hpp"
#include "bpmn/solver.hpp"
#include "bpmn/transform.hpp"
#include "bpmn/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitSolverFailure = 4;

struct GlobalOpts {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string output_dir = ".";
};

fs::path out_path(const GlobalOpts& g, const std::string& name) {
  fs::create_directories(g.output_dir);
  return fs::path(g.output_dir) / name;
}

std::vector<double> parse_lambda_list(const std::string& arg) {
  std::vector<double> out;
  std::stringstream ss(arg);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  if (out.empty()) throw bpmn::ValidationError("empty --lambda list");
  std::sort(out.begin(), out.end(), std::greater<double>());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// "count,ratio" -> log-spaced grid from the data-driven lambda_max.
std::pair<std::size_t, double> parse_auto_grid(const std::string& arg) {
  const auto comma = arg.find(',');
  if (comma == std::string::npos) {
    throw bpmn::ValidationError("--auto-grid expects count,ratio");
  }
  const std::size_t count = std::stoul(arg.substr(0, comma));
  const double ratio = std::stod(arg.substr(comma + 1));
  return {count, ratio};
}

std::vector<double> resolve_lambdas(const std::string& lambda_arg,
                                    const std::string& auto_grid_arg,
                                    const bpmn::SampleMatrix& x,
                                    const bpmn::SolverConfig& cfg) {
  if (!lambda_arg.empty() && !auto_grid_arg.empty()) {
    throw bpmn::ValidationError("pass either --lambda or --auto-grid, not both");
  }
  if (!lambda_arg.empty()) return parse_lambda_list(lambda_arg);
  std::size_t count = cfg.grid_count;
  double ratio = cfg.grid_ratio;
  if (!auto_grid_arg.empty()) {
    std::tie(count, ratio) = parse_auto_grid(auto_grid_arg);
  }
  // Model-scale grid: p * (internal lambda_max of the stacked problem).
  const bpmn::StackedProblem sp = bpmn::build_stacked(x);
  const double lam_max =
      bpmn::lambda_max(sp, cfg) * static_cast<double>(x.p());
  return bpmn::auto_lambda_grid(lam_max, count, ratio);
}

json solver_config_json(const bpmn::SolverConfig& cfg) {
  return {{"tol", cfg.tol},
          {"max_outer", cfg.max_outer},
          {"max_inner", cfg.max_inner},
          {"weight_floor", cfg.weight_floor},
          {"screening", cfg.screening == bpmn::Screening::strong ? "strong" : "none"}};
}

int cmd_simulate(const GlobalOpts& g, std::size_t p, double edge_prob,
                 std::size_t n, std::size_t burn_in, std::size_t thinning,
                 const std::vector<std::string>& diag_overrides) {
  bpmn::GraphSpec spec;
  spec.p = p;
  spec.edge_prob = edge_prob;
  spec.seed = bpmn::Rng(g.seed).split(0).seed();
  for (const std::string& ov : diag_overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) {
      throw bpmn::ValidationError("--diag expects s=value with 1-based s");
    }
    const std::size_t vertex = std::stoul(ov.substr(0, eq));
    if (vertex < 1) throw bpmn::ValidationError("--diag vertex is 1-based");
    spec.diagonal_override.emplace_back(vertex - 1, std::stod(ov.substr(eq + 1)));
  }
  bpmn::GibbsConfig gibbs;
  gibbs.n_samples = n;
  gibbs.burn_in = burn_in;
  gibbs.thinning = thinning;
  gibbs.seed = bpmn::Rng(g.seed).split(1).seed();

  const bpmn::ThetaMatrix theta = bpmn::generate_graph(spec);
  const bpmn::SampleMatrix samples = bpmn::gibbs_sample(theta, gibbs);

  const fs::path theta_path = out_path(g, "theta.json");
  const fs::path samples_path = out_path(g, "samples.csv");
  bpmn::write_theta_json(theta_path, theta);
  bpmn::write_samples_csv(samples_path, samples);

  json cfg{{"p", p},
           {"edge_prob", edge_prob},
           {"n", n},
           {"burn_in", burn_in},
           {"thinning", thinning},
           {"seed", g.seed},
           {"graph_seed", spec.seed},
           {"gibbs_seed", gibbs.seed},
           {"diag", diag_overrides}};
  bpmn::Manifest manifest("simulate", cfg);
  manifest.add_output(theta_path);
  manifest.add_output(samples_path);
  manifest.write(out_path(g, "simulate_manifest.json"));
  std::cout << "simulate: wrote " << samples.n() << "x" << samples.p() << " samples\n";
  return kExitOk;
}

int cmd_fit(const GlobalOpts& g, const std::string& method_name,
            const std::string& input, const std::string& lambda_arg,
            const std::string& auto_grid_arg, const bpmn::SolverConfig& scfg,
            const bpmn::DirectConfig& dcfg, const std::string& symmetrize,
            bool impute_zero, const std::string& edges_csv, bool positive_only,
            const std::string& dump_design) {
  const bpmn::Method method = bpmn::method_from_name(method_name);
  const bpmn::SampleMatrix x = bpmn::read_samples_csv(input, impute_zero);
  const std::vector<double> lambdas = resolve_lambdas(lambda_arg, auto_grid_arg, x, scfg);

  bpmn::Symmetrize rule = bpmn::Symmetrize::mean;
  if (symmetrize == "and") {
    rule = bpmn::Symmetrize::and_rule;
  } else if (symmetrize == "or") {
    rule = bpmn::Symmetrize::or_rule;
  } else if (symmetrize != "mean") {
    throw bpmn::ValidationError("--symmetrize must be mean, and, or or");
  }

  bpmn::FitReport report;
  switch (method) {
    case bpmn::Method::plg:
      report = bpmn::fit_plg(x, lambdas, scfg);
      break;
    case bpmn::Method::nlr:
      report = bpmn::fit_nlr(x, lambdas, scfg, rule, g.threads);
      break;
    case bpmn::Method::direct_pl:
      report = bpmn::fit_direct_pl(x, lambdas, dcfg);
      break;
  }

  const fs::path report_path = out_path(g, "fit_report.json");
  const fs::path coef_path = out_path(g, "coefficients.json");
  bpmn::write_json(report_path, bpmn::fit_report_to_json(report, true));
  bpmn::write_json(coef_path, bpmn::fit_report_to_json(report, false));

  json cfg{{"method", method_name},
           {"input", fs::path(input).filename().string()},
           {"lambdas", lambdas},
           {"symmetrize", symmetrize},
           {"impute_zero", impute_zero},
           {"positive_only", positive_only},
           {"seed", g.seed},
           {"threads", g.threads},
           {"solver", solver_config_json(scfg)}};
  bpmn::Manifest manifest("fit", cfg);
  manifest.add_input(input);
  manifest.add_output(report_path, /*deterministic=*/false);
  manifest.add_output(coef_path);

  if (!edges_csv.empty()) {
    const fs::path edges_path = out_path(g, edges_csv);
    std::ofstream out(edges_path);
    out.precision(17);
    out << "lambda,s,t,weight\n";
    for (std::size_t i = 0; i < report.estimates.size(); ++i) {
      const bpmn::ThetaMatrix& est = report.estimates[i];
      for (std::size_t s = 0; s < est.p(); ++s) {
        for (std::size_t t = s + 1; t < est.p(); ++t) {
          const double w = est(s, t);
          if (w == 0.0 || (positive_only && w <= 0.0)) continue;
          out << report.lambdas[i].lambda << ',' << s + 1 << ',' << t + 1 << ','
              << w << '\n';
        }
      }
    }
    out.close();
    manifest.add_output(edges_path);
  }
  if (!dump_design.empty()) {
    const fs::path design_path = out_path(g, dump_design);
    std::ofstream out(design_path);
    bpmn::write_design_coordinates(out, bpmn::build_stacked(x));
    out.close();
    manifest.add_output(design_path);
  }
  manifest.write(out_path(g, "fit_manifest.json"));

  for (const std::string& w : report.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "fit: " << method_name << " over " << lambdas.size()
            << " lambdas done\n";
  return kExitOk;
}

int cmd_select(const GlobalOpts& g, const std::string& input,
               const std::string& estimator, const std::string& lambda_arg,
               const std::string& auto_grid_arg, std::size_t subsamples,
               std::size_t subsample_size, double beta,
               const bpmn::SolverConfig& scfg, bool impute_zero) {
  const bpmn::SampleMatrix x = bpmn::read_samples_csv(input, impute_zero);
  bpmn::StarsConfig cfg;
  cfg.n_subsamples = subsamples;
  cfg.subsample_size = subsample_size;
  cfg.beta = beta;
  cfg.seed = g.seed;
  cfg.estimator = bpmn::method_from_name(estimator);
  cfg.solver = scfg;
  cfg.threads = g.threads;
  cfg.lambda_grid = resolve_lambdas(lambda_arg, auto_grid_arg, x, scfg);
  if (cfg.estimator == bpmn::Method::nlr) {
    for (double& lam : cfg.lambda_grid) lam = bpmn::half_lambda_translate(lam);
  }

  const bpmn::StarsResult result = bpmn::stars_select(x, cfg);

  const fs::path curve_path = out_path(g, "instability.csv");
  const fs::path selected_path = out_path(g, "selected.json");
  bpmn::write_instability_csv(curve_path, result);
  bpmn::write_json(selected_path, bpmn::stars_result_to_json(result));

  json cfg_json{{"input", fs::path(input).filename().string()},
                {"estimator", estimator},
                {"lambdas", cfg.lambda_grid},
                {"subsamples", subsamples},
                {"subsample_size", subsample_size},
                {"beta", beta},
                {"seed", g.seed},
                {"threads", g.threads},
                {"solver", solver_config_json(scfg)}};
  bpmn::Manifest manifest("select", cfg_json);
  manifest.add_input(input);
  manifest.add_output(curve_path);
  manifest.add_output(selected_path);
  manifest.write(out_path(g, "select_manifest.json"));
  std::cout << "select: lambda = " << result.selected_lambda << '\n';
  return kExitOk;
}

int cmd_roc(const GlobalOpts& g, const std::string& truth_path,
            const std::string& estimate_path, int lambda_index,
            const std::string& mode) {
  const bpmn::ThetaMatrix truth = bpmn::read_theta_json(truth_path);
  const json est_json = bpmn::read_json(estimate_path);

  bpmn::ThetaMatrix scores(truth.p());
  if (est_json.contains("entries")) {
    // Plain theta artifact: per-lambda magnitudes.
    if (mode == "path") {
      throw bpmn::ValidationError("path mode needs a fit report, not a theta file");
    }
    scores = bpmn::theta_from_json(est_json);
  } else if (est_json.contains("fits")) {
    const auto& fits = est_json.at("fits");
    if (mode == "path") {
      bpmn::ThetaMatrix entry(truth.p());
      for (const auto& fit : fits) {
        const double lam = fit.at("lambda").get<double>();
        for (const auto& e : fit.at("edges")) {
          const std::size_t s = e.at(0).get<std::size_t>() - 1;
          const std::size_t t = e.at(1).get<std::size_t>() - 1;
          if (entry(s, t) == 0.0) entry.set(s, t, lam);
        }
      }
      scores = entry;
    } else {
      if (lambda_index < 0 ||
          static_cast<std::size_t>(lambda_index) >= fits.size()) {
        throw bpmn::ValidationError("--lambda-index out of range");
      }
      const auto& fit = fits[static_cast<std::size_t>(lambda_index)];
      for (const auto& e : fit.at("edges")) {
        scores.set(e.at(0).get<std::size_t>() - 1, e.at(1).get<std::size_t>() - 1,
                   e.at(2).get<double>());
      }
    }
  } else {
    throw bpmn::ValidationError("unrecognized estimate artifact");
  }

  const bpmn::RocCurve curve = bpmn::roc_curve(truth, scores);
  const fs::path roc_path = out_path(g, "roc.csv");
  const fs::path auc_path = out_path(g, "auc.json");
  bpmn::write_roc_csv(roc_path, curve);
  bpmn::write_json(auc_path, json{{"schema_version", bpmn::kSchemaVersion},
                                  {"auc", curve.auc},
                                  {"mode", mode}});

  bpmn::Manifest manifest("roc", json{{"truth", fs::path(truth_path).filename().string()},
                                      {"estimate", fs::path(estimate_path).filename().string()},
                                      {"lambda_index", lambda_index},
                                      {"mode", mode},
                                      {"seed", g.seed}});
  manifest.add_input(truth_path);
  manifest.add_input(estimate_path);
  manifest.add_output(roc_path);
  manifest.add_output(auc_path);
  manifest.write(out_path(g, "roc_manifest.json"));
  std::cout << "roc: auc = " << curve.auc << '\n';
  return kExitOk;
}

int cmd_bench(const GlobalOpts& g, const std::string& input,
              const std::string& methods_arg, const std::string& lambda_arg,
              const std::string& auto_grid_arg, int repeats, double edge_prob,
              const bpmn::SolverConfig& scfg, const bpmn::DirectConfig& dcfg,
              bool impute_zero, bool half_lambda_nlr) {
  if (repeats < 3) {
    std::cerr << "warning: --repeats below the minimum of 3\n";
    return kExitUsage;
  }
  const bpmn::SampleMatrix x = bpmn::read_samples_csv(input, impute_zero);
  const std::vector<double> lambdas = resolve_lambdas(lambda_arg, auto_grid_arg, x, scfg);

  std::vector<bpmn::Method> methods;
  std::stringstream ss(methods_arg);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) methods.push_back(bpmn::method_from_name(tok));
  }
  if (methods.empty()) throw bpmn::ValidationError("--method list is empty");

  bpmn::BenchMeta meta{edge_prob, g.seed};
  std::vector<bpmn::BenchRecord> all;
  for (const bpmn::Method method : methods) {
    std::vector<double> grid = lambdas;
    if (method == bpmn::Method::nlr && half_lambda_nlr) {
      for (double& lam : grid) lam = bpmn::half_lambda_translate(lam);
    }
    const auto records = bpmn::bench_fit(method, x, grid, scfg, dcfg, repeats, meta);
    all.insert(all.end(), records.begin(), records.end());
  }

  const fs::path bench_path = out_path(g, "bench.csv");
  const fs::path summary_path = out_path(g, "bench_summary.csv");
  bpmn::write_bench_csv(bench_path, all);
  bpmn::write_bench_summary_csv(summary_path, all);
  bpmn::Manifest manifest("bench", json{{"input", fs::path(input).filename().string()},
                                        {"methods", methods_arg},
                                        {"lambdas", lambdas},
                                        {"repeats", repeats},
                                        {"edge_prob", edge_prob},
                                        {"half_lambda_nlr", half_lambda_nlr},
                                        {"seed", g.seed},
                                        {"solver", solver_config_json(scfg)}});
  manifest.add_input(input);
  manifest.add_output(bench_path, /*deterministic=*/false);
  manifest.add_output(summary_path, /*deterministic=*/false);
  manifest.write(out_path(g, "bench_manifest.json"));
  std::cout << "bench: " << all.size() << " records\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse binary pairwise Markov network learning"};
  app.set_version_flag("--version", bpmn::kVersion);
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "RNG seed");
  app.add_option("--threads", g.threads, "worker threads for independent fits");
  app.add_option("--output-dir", g.output_dir, "output directory");

  bpmn::SolverConfig scfg;
  bpmn::DirectConfig dcfg;
  std::string screening = "strong";

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a graph and Gibbs samples");
  std::size_t sim_p = 0, sim_n = 1000, sim_burn = 1000, sim_thin = 1;
  double sim_edge_prob = 0.3;
  std::vector<std::string> sim_diag;
  sim->add_option("--p", sim_p, "vertex count")->required();
  sim->add_option("--edge-prob", sim_edge_prob, "edge generation probability");
  sim->add_option("--n", sim_n, "sample count");
  sim->add_option("--burn-in", sim_burn, "burn-in sweeps");
  sim->add_option("--thinning", sim_thin, "sweeps between samples");
  sim->add_option("--diag", sim_diag, "diagonal override s=value (1-based)");

  // fit
  auto* fit = app.add_subcommand("fit", "fit an estimator across lambdas");
  std::string fit_method = "plg", fit_input, fit_lambda, fit_auto_grid;
  std::string fit_symmetrize = "mean", fit_edges_csv, fit_dump_design;
  bool fit_impute_zero = false, fit_positive_only = false;
  fit->add_option("--method", fit_method, "plg | nlr | direct");
  fit->add_option("--input", fit_input, "samples CSV")->required();
  fit->add_option("--lambda", fit_lambda, "comma-separated lambda list");
  fit->add_option("--auto-grid", fit_auto_grid, "count,ratio auto grid");
  fit->add_option("--symmetrize", fit_symmetrize, "nlr rule: mean | and | or");
  fit->add_flag("--impute-zero", fit_impute_zero, "impute missing cells as 0");
  fit->add_option("--edges-csv", fit_edges_csv, "also write an edge list CSV");
  fit->add_flag("--positive-only", fit_positive_only,
                "restrict the edge list to positive weights");
  fit->add_option("--dump-design", fit_dump_design,
                  "debug: materialized design in coordinate format");

  // select
  auto* sel = app.add_subcommand("select", "stability-based lambda selection");
  std::string sel_input, sel_estimator = "plg", sel_lambda, sel_auto_grid;
  std::size_t sel_subsamples = 20, sel_subsample_size = 0;
  double sel_beta = 0.05;
  bool sel_impute_zero = false;
  sel->add_option("--input", sel_input, "samples CSV")->required();
  sel->add_option("--estimator", sel_estimator, "plg | nlr");
  sel->add_option("--lambda", sel_lambda, "comma-separated lambda grid");
  sel->add_option("--auto-grid", sel_auto_grid, "count,ratio auto grid");
  sel->add_option("--subsamples", sel_subsamples, "number of subsamples");
  sel->add_option("--subsample-size", sel_subsample_size,
                  "rows per subsample (0 = floor(10 sqrt(N)))");
  sel->add_option("--beta", sel_beta, "instability threshold");
  sel->add_flag("--impute-zero", sel_impute_zero, "impute missing cells as 0");

  // roc
  auto* roc = app.add_subcommand("roc", "structure-recovery ROC curve");
  std::string roc_truth, roc_estimate, roc_mode = "per-lambda";
  int roc_lambda_index = 0;
  roc->add_option("--truth", roc_truth, "truth theta JSON")->required();
  roc->add_option("--estimate", roc_estimate, "theta JSON or fit report")->required();
  roc->add_option("--lambda-index", roc_lambda_index, "fit index for per-lambda mode");
  roc->add_option("--mode", roc_mode, "per-lambda | path");

  // bench
  auto* bench = app.add_subcommand("bench", "per-lambda timing harness");
  std::string bench_input, bench_methods = "plg,nlr", bench_lambda, bench_auto_grid;
  int bench_repeats = 5;
  double bench_edge_prob = 0.0;
  bool bench_impute_zero = false, bench_half_nlr = true;
  bench->add_option("--input", bench_input, "samples CSV")->required();
  bench->add_option("--method", bench_methods, "comma list: plg,nlr,direct");
  bench->add_option("--lambda", bench_lambda, "comma-separated lambda list");
  bench->add_option("--auto-grid", bench_auto_grid, "count,ratio auto grid");
  bench->add_option("--repeats", bench_repeats, "timed repeats (minimum 3)");
  bench->add_option("--edge-prob", bench_edge_prob, "metadata for the records");
  bench->add_flag("--impute-zero", bench_impute_zero, "impute missing cells as 0");
  bench->add_flag("!--no-half-lambda-nlr", bench_half_nlr,
                  "disable the half-lambda translation for nlr");

  // shared solver knobs
  for (CLI::App* sub : {fit, sel, bench}) {
    sub->add_option("--tol", scfg.tol, "solver tolerance");
    sub->add_option("--max-outer", scfg.max_outer, "IRLS rounds per lambda");
    sub->add_option("--max-inner", scfg.max_inner, "coordinate sweeps per lambda");
    sub->add_option("--screening", screening, "strong | none");
    sub->add_option("--direct-tol", dcfg.tol, "direct optimizer tolerance");
    sub->add_option("--direct-max-iter", dcfg.max_iter, "direct iteration budget");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return kExitUsage;
  }

  scfg.screening =
      screening == "none" ? bpmn::Screening::none : bpmn::Screening::strong;

  try {
    if (sim->parsed()) {
      return cmd_simulate(g, sim_p, sim_edge_prob, sim_n, sim_burn, sim_thin,
                          sim_diag);
    }
    if (fit->parsed()) {
      return cmd_fit(g, fit_method, fit_input, fit_lambda, fit_auto_grid, scfg,
                     dcfg, fit_symmetrize, fit_impute_zero, fit_edges_csv,
                     fit_positive_only, fit_dump_design);
    }
    if (sel->parsed()) {
      return cmd_select(g, sel_input, sel_estimator, sel_lambda, sel_auto_grid,
                        sel_subsamples, sel_subsample_size, sel_beta, scfg,
                        sel_impute_zero);
    }
    if (roc->parsed()) {
      return cmd_roc(g, roc_truth, roc_estimate, roc_lambda_index, roc_mode);
    }
    if (bench->parsed()) {
      return cmd_bench(g, bench_input, bench_methods, bench_lambda,
                       bench_auto_grid, bench_repeats, bench_edge_prob, scfg,
                       dcfg, bench_impute_zero, bench_half_nlr);
    }
  } catch (const bpmn::InfeasibleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const bpmn::PathConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolverFailure;
  } catch (const bpmn::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolverFailure;
  } catch (const bpmn::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
