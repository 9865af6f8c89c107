#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bpmn/transform.hpp"
#include "bpmn/types.hpp"

namespace bpmn {

// L1-penalized logistic regression solver: IRLS outer loop, cyclic
// coordinate descent over an active set, warm-started lambda path with
// strong-rule screening and KKT repair.
//
// All lambdas here are internal penalty levels against the per-observation
// averaged loss
//   (1/n) sum_k [log(1 + exp(d_k' beta)) - y_k d_k' beta]
//     + lambda * sum_j w_j |beta_j|.
// The estimators own the translation from the model-scale lambda (for the
// stacked problem, internal = model / p).

enum class Screening { none, strong };

struct SolverConfig {
  double tol = 1e-7;           // on max_j a_j (delta beta_j)^2 per sweep/round
  std::size_t max_outer = 100;     // IRLS rounds per lambda
  std::size_t max_inner = 10000;   // coordinate sweeps per lambda
  double weight_floor = 1e-5;  // IRLS weight clamp and mu clipping band
  Screening screening = Screening::strong;
  std::vector<double> lambda_grid;  // strictly decreasing; empty = auto grid
  std::size_t grid_count = 100;
  double grid_ratio = 0.01;  // lambda_min / lambda_max for the auto grid
  bool track_objective = false;
};

// KKT certificates are required within 10 * tol on return.
inline double kkt_tolerance(const SolverConfig& cfg) { return 10.0 * cfg.tol; }

struct SolveDiagnostics {
  std::size_t outer_iterations = 0;
  std::size_t sweeps = 0;
  double kkt_max_violation = 0.0;
  bool converged = false;
  bool separation_warning = false;   // some unpenalized coefficient beyond 30
  std::size_t nonmonotone_rounds = 0;  // rounds accepted after 10 failed halvings
  std::size_t screened_out = 0;        // penalized coords masked on entry
  std::size_t kkt_readded = 0;         // screening violators re-added
  std::int64_t wall_time_ns = 0;
  std::vector<double> objective_trace;  // per accepted round, when enabled
};

struct CdFit {
  std::vector<double> beta;
  SolveDiagnostics diag;
};

struct PathSolution {
  std::vector<double> lambdas;  // internal, strictly decreasing
  std::vector<std::vector<double>> coefficients;
  std::vector<SolveDiagnostics> diagnostics;
  std::size_t n_features = 0;
};

struct ConvergenceError : Error {
  ConvergenceError(const std::string& what, std::vector<double> best_iterate,
                   double kkt)
      : Error(what), best(std::move(best_iterate)), kkt_max_violation(kkt) {}
  std::vector<double> best;
  double kkt_max_violation;
};

struct PathConvergenceError : Error {
  PathConvergenceError(const std::string& what, PathSolution partial_path,
                       std::size_t index)
      : Error(what), partial(std::move(partial_path)), failed_index(index) {}
  PathSolution partial;
  std::size_t failed_index;
};

inline double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

// Log-spaced grid from lambda_max down to ratio * lambda_max.
std::vector<double> auto_lambda_grid(double lambda_max_value, std::size_t count,
                                     double ratio);

// Validates a strictly decreasing positive grid.
void check_lambda_grid(std::span<const double> grid);

// Smallest internal lambda at which every penalized coefficient is zero:
// max over pair columns of |d_j' (y - mu_null)| / n, with the null model
// fitting each block's indicator at logit(column mean), means clamped to
// [weight_floor, 1 - weight_floor].
double lambda_max(const StackedProblem& sp,
                  const SolverConfig& cfg = SolverConfig{});

// Single fit at one penalty level.  Throws ConvergenceError (carrying the
// best iterate and its KKT violation) if the iteration budget runs out.
CdFit fit_logistic_lasso(const StackedProblem& sp, double lambda,
                         std::span<const double> warm, const SolverConfig& cfg);

// Warm-started fit over the config's grid (auto grid from lambda_max when
// empty).  Per-lambda non-convergence throws PathConvergenceError with the
// partial path.
PathSolution fit_path(const StackedProblem& sp, const SolverConfig& cfg);

// Strong-rule eligibility mask for the step lambda_prev -> lambda_cur:
// penalized j is kept when |(1/n) d_j'(y - mu(beta_prev))| >=
// w_j (2 lambda_cur - lambda_prev); unpenalized and warm-nonzero
// coordinates are always kept.  Safe only together with the KKT repair
// loop, which the solver always runs.
std::vector<std::uint8_t> strong_rule_screen(const StackedProblem& sp,
                                             std::span<const double> beta_prev,
                                             double lambda_prev, double lambda_cur);

}  // namespace bpmn
