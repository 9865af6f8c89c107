#include "bpmn/solver.hpp"

#include <algorithm>
#include <cmath>

#include "bpmn/cd_core.hpp"
#include "bpmn/math.hpp"

namespace bpmn {

double lambda_max(const StackedProblem& sp, const SolverConfig& cfg) {
  const std::size_t n = sp.n_obs;
  const std::size_t p = sp.vertex_count;
  const std::size_t n_samples = sp.sample_count;
  const SampleMatrix& x = sp.design.samples();

  bool constant = true;
  const double first = sp.response.front();
  for (const double v : sp.response) {
    if (v != first) {
      constant = false;
      break;
    }
  }
  if (constant) {
    throw DegenerateInputError("response is constant; lambda_max undefined");
  }

  // Null model: block s's indicator at logit(mean of column s), so the
  // fitted probability on block s is the clamped column mean.
  std::vector<double> resid(n);
  for (std::size_t s = 0; s < p; ++s) {
    const double mean = std::clamp(x.column_mean(s), cfg.weight_floor,
                                   1.0 - cfg.weight_floor);
    for (std::size_t i = 0; i < n_samples; ++i) {
      resid[s * n_samples + i] = sp.response[s * n_samples + i] - mean;
    }
  }
  std::vector<double> grad(sp.n_features);
  sp.design.rmatvec(resid, grad);
  double lam = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < sp.n_features; ++j) {
    if (sp.penalty_factors[j] != 0.0) {
      lam = std::max(lam, std::abs(grad[j]) * inv_n / sp.penalty_factors[j]);
    }
  }
  return lam;
}

CdFit fit_logistic_lasso(const StackedProblem& sp, double lambda,
                         std::span<const double> warm, const SolverConfig& cfg) {
  CdFit fit = detail::cd_fit_logistic(sp.design, sp.response, sp.penalty_factors,
                                      lambda, warm, nullptr, cfg);
  if (!fit.diag.converged) {
    throw ConvergenceError(
        "fit_logistic_lasso did not converge (kkt=" +
            std::to_string(fit.diag.kkt_max_violation) + ")",
        std::move(fit.beta), fit.diag.kkt_max_violation);
  }
  return fit;
}

PathSolution fit_path(const StackedProblem& sp, const SolverConfig& cfg) {
  return detail::cd_path_logistic(sp.design, sp.response, sp.penalty_factors, cfg);
}

std::vector<std::uint8_t> strong_rule_screen(const StackedProblem& sp,
                                             std::span<const double> beta_prev,
                                             double lambda_prev, double lambda_cur) {
  if (!(lambda_cur <= lambda_prev)) {
    throw ValidationError("strong rule requires lambda_cur <= lambda_prev");
  }
  return detail::strong_rule_mask(sp.design, sp.response, sp.penalty_factors,
                                  beta_prev, lambda_prev, lambda_cur);
}


std::vector<double> auto_lambda_grid(double lambda_max_value, std::size_t count,
                                     double ratio) {
  if (count == 0 || !(ratio > 0.0 && ratio < 1.0) || !(lambda_max_value > 0.0)) {
    throw ValidationError("invalid auto-grid parameters");
  }
  std::vector<double> grid(count);
  if (count == 1) {
    grid[0] = lambda_max_value;
    return grid;
  }
  const double log_max = std::log(lambda_max_value);
  const double log_min = std::log(lambda_max_value * ratio);
  for (std::size_t i = 0; i < count; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(count - 1);
    grid[i] = std::exp(log_max + f * (log_min - log_max));
  }
  return grid;
}

void check_lambda_grid(std::span<const double> grid) {
  if (grid.empty()) throw ValidationError("lambda grid must be nonempty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) {
      throw ValidationError("lambda grid must be positive and finite");
    }
    if (i > 0 && grid[i] >= grid[i - 1]) {
      throw ValidationError("lambda grid must be strictly decreasing");
    }
  }
}

}  // namespace bpmn

