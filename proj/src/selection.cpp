#include "bpmn/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bpmn/cd_core.hpp"
#include "bpmn/parallel.hpp"
#include "bpmn/rng.hpp"
#include "bpmn/transform.hpp"

namespace bpmn {

namespace {

std::vector<std::size_t> draw_subsample(std::size_t n, std::size_t size, Rng rng) {
  // Partial Fisher-Yates; indices returned sorted for reproducible row order.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t j = i + rng.next_below(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(size);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Per-lambda edge indicators (pair_index order) of one estimator run.
std::vector<std::vector<std::uint8_t>> fit_edge_sets(const SampleMatrix& x,
                                                     const StarsConfig& cfg) {
  const std::size_t p = x.p();
  const std::size_t m = pair_count(p);
  std::vector<std::vector<std::uint8_t>> edges;

  if (cfg.estimator == Method::plg) {
    SolverConfig path_cfg = cfg.solver;
    path_cfg.lambda_grid.clear();
    for (const double lam : cfg.lambda_grid) {
      path_cfg.lambda_grid.push_back(lam / static_cast<double>(p));
    }
    const StackedProblem sp = build_stacked(x);
    const PathSolution path = fit_path(sp, path_cfg);
    for (const auto& beta : path.coefficients) {
      std::vector<std::uint8_t> e(m, 0);
      for (std::size_t j = 0; j < m; ++j) e[j] = beta[j] != 0.0;
      edges.push_back(std::move(e));
    }
  } else if (cfg.estimator == Method::nlr) {
    const FitReport report =
        fit_nlr(x, cfg.lambda_grid, cfg.solver, cfg.symmetrize, 1);
    for (const auto& estimate : report.estimates) {
      std::vector<std::uint8_t> e(m, 0);
      for (std::size_t t = 1; t < p; ++t) {
        for (std::size_t s = 0; s < t; ++s) {
          e[pair_index(s, t, p)] = estimate(s, t) != 0.0;
        }
      }
      edges.push_back(std::move(e));
    }
  } else {
    throw ValidationError("stars_select supports plg or nlr estimators");
  }
  return edges;
}

}  // namespace

StarsResult stars_select(const SampleMatrix& x, const StarsConfig& cfg) {
  const std::size_t n = x.n();
  const std::size_t m = pair_count(x.p());
  if (cfg.n_subsamples == 0) throw ValidationError("n_subsamples must be >= 1");
  if (!(cfg.beta > 0.0 && cfg.beta < 0.5)) {
    throw ValidationError("beta must be in (0, 0.5)");
  }
  check_lambda_grid(cfg.lambda_grid);

  std::size_t sub_size = cfg.subsample_size;
  if (sub_size == 0) {
    sub_size = static_cast<std::size_t>(
        std::floor(10.0 * std::sqrt(static_cast<double>(n))));
  }
  if (sub_size == 0 || sub_size >= n) {
    throw ValidationError("subsample size must be in [1, N)");
  }

  const std::size_t n_lambda = cfg.lambda_grid.size();
  const Rng root(cfg.seed);
  std::vector<std::vector<std::vector<std::uint8_t>>> all_edges(cfg.n_subsamples);
  parallel_for(cfg.n_subsamples, cfg.threads, [&](std::size_t b) {
    const auto idx = draw_subsample(n, sub_size, root.split(b));
    all_edges[b] = fit_edge_sets(x.subset(idx), cfg);
  });

  StarsResult result;
  result.lambdas = cfg.lambda_grid;
  result.instability.resize(n_lambda);
  result.mean_edge_count.resize(n_lambda);
  const double n_sub = static_cast<double>(cfg.n_subsamples);
  for (std::size_t i = 0; i < n_lambda; ++i) {
    double total_instability = 0.0;
    std::size_t total_edges = 0;
    for (std::size_t j = 0; j < m; ++j) {
      std::size_t count = 0;
      for (std::size_t b = 0; b < cfg.n_subsamples; ++b) {
        count += all_edges[b][i][j];
      }
      total_edges += count;
      total_instability += edge_instability(static_cast<double>(count) / n_sub);
    }
    result.instability[i] = total_instability / static_cast<double>(m);
    result.mean_edge_count[i] = static_cast<double>(total_edges) / n_sub;
  }

  // Monotonize from the sparse end (grid is decreasing, so index 0 is the
  // largest lambda) and pick the smallest feasible lambda.
  result.instability_monotone.resize(n_lambda);
  double running = 0.0;
  for (std::size_t i = 0; i < n_lambda; ++i) {
    running = std::max(running, result.instability[i]);
    result.instability_monotone[i] = running;
  }
  bool found = false;
  for (std::size_t i = n_lambda; i-- > 0;) {
    if (result.instability_monotone[i] <= cfg.beta) {
      result.selected_index = i;
      result.selected_lambda = result.lambdas[i];
      found = true;
      break;
    }
  }
  if (!found) {
    throw InfeasibleError(
        "instability exceeds beta on the whole grid; no feasible lambda");
  }
  result.selected_lambda_internal =
      cfg.estimator == Method::plg
          ? result.selected_lambda / static_cast<double>(x.p())
          : result.selected_lambda;
  return result;
}

}  // namespace bpmn
