#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bpmn/solver.hpp"
#include "bpmn/types.hpp"

namespace bpmn {

// The three learners.  All report through FitReport and are scored with the
// same pseudo-likelihood objective, so their outputs are directly
// comparable per lambda.

enum class Method { plg, nlr, direct_pl };

enum class Symmetrize { mean, and_rule, or_rule };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct DirectConfig {
  double tol = 1e-7;             // proximal-gradient mapping max-norm
  std::size_t max_iter = 50000;  // per lambda
  std::size_t power_iters = 64;  // step-size initialization
  double step_growth = 1.1;      // recovery after backtracking
};

// Per-lambda bookkeeping of the three penalty scales in play:
//   lambda          as given to the estimator,
//   lambda_internal the solver-facing per-observation-averaged level,
//   lambda_pl       the pseudo-likelihood-scale equivalent used for scoring
//                   (PLG/direct: as given; node-wise: twice the given value,
//                   the half-lambda convention made explicit).
struct LambdaInfo {
  double lambda = 0.0;
  double lambda_internal = 0.0;
  double lambda_pl = 0.0;
};

struct FitReport {
  Method method = Method::plg;
  std::vector<LambdaInfo> lambdas;
  std::vector<ThetaMatrix> estimates;
  std::vector<ObjectiveValue> objective;  // pseudo_likelihood at lambda_pl
  std::vector<std::int64_t> wall_time_ns;
  std::vector<std::size_t> outer_iterations;
  std::vector<std::size_t> sweeps;
  std::vector<double> kkt_max_violation;
  std::vector<bool> converged;
  std::vector<double> asymmetry;  // node-wise only: max |a_st - a_ts| per lambda
  std::vector<std::string> warnings;
};

// Stacked-regression estimator: builds the implicit design, runs the
// penalized path at internal level lambda / p, and mirrors each solution
// back to a symmetric ThetaMatrix.  lambdas must be strictly decreasing
// and positive.
FitReport fit_plg(const SampleMatrix& x, const std::vector<double>& lambdas,
                  const SolverConfig& cfg);

// Node-wise logistic regressions, one per vertex (intercept = theta_ss,
// unpenalized), combined by the symmetrization rule.  lambdas are node-wise
// scale (half the stacked scale).  Non-converged nodes are reported as
// warnings and the fit continues.
FitReport fit_nlr(const SampleMatrix& x, const std::vector<double>& lambdas,
                  const SolverConfig& cfg, Symmetrize rule = Symmetrize::mean,
                  int threads = 1);

// Proximal-gradient ascent on the pseudo-likelihood over ThetaMatrix
// directly; the reference maximizer the stacked solver is checked against.
// Accepts lambda = 0.
FitReport fit_direct_pl(const SampleMatrix& x, const std::vector<double>& lambdas,
                        const DirectConfig& cfg);

// || vec(a) - vec(b) ||_2 / || vec(b) ||_2 over the packed parameterization
// (pairs once, then diagonals).
double relative_difference(const ThetaMatrix& a, const ThetaMatrix& b);

}  // namespace bpmn
