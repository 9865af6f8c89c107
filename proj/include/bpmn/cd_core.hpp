#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <vector>

#include "bpmn/math.hpp"
#include "bpmn/solver.hpp"
#include "bpmn/types.hpp"

namespace bpmn {

// Design concept shared by the stacked problem, the node-wise dense
// problems, and test materializations.  The solver touches data only
// through these products.
template <class D>
concept LassoDesign = requires(const D& d, std::size_t j, double alpha,
                               std::span<const double> v, std::span<double> out) {
  { d.rows() } -> std::convertible_to<std::size_t>;
  { d.cols() } -> std::convertible_to<std::size_t>;
  d.matvec(v, out);
  d.rmatvec(v, out);
  { d.column_dot(j, v) } -> std::convertible_to<double>;
  { d.column_dot2(j, v, v) } -> std::convertible_to<double>;
  { d.column_weighted_sq_norm(j, v) } -> std::convertible_to<double>;
  d.column_axpy(j, alpha, out);
};

// Plain column-major dense design; used by the node-wise regressions and by
// tests that materialize the stacked matrix.
class DenseDesign {
 public:
  DenseDesign(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& at(std::size_t i, std::size_t j) { return values_[j * rows_ + i]; }
  double at(std::size_t i, std::size_t j) const { return values_[j * rows_ + i]; }

  void matvec(std::span<const double> u, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t j = 0; j < cols_; ++j) {
      const double uj = u[j];
      if (uj == 0.0) continue;
      const double* col = values_.data() + j * rows_;
      for (std::size_t i = 0; i < rows_; ++i) out[i] += col[i] * uj;
    }
  }

  void rmatvec(std::span<const double> v, std::span<double> out) const {
    for (std::size_t j = 0; j < cols_; ++j) out[j] = column_dot(j, v);
  }

  double column_dot(std::size_t j, std::span<const double> v) const {
    const double* col = values_.data() + j * rows_;
    double acc = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) acc += col[i] * v[i];
    return acc;
  }

  double column_dot2(std::size_t j, std::span<const double> a,
                     std::span<const double> b) const {
    const double* col = values_.data() + j * rows_;
    double acc = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) acc += col[i] * a[i] * b[i];
    return acc;
  }

  double column_weighted_sq_norm(std::size_t j, std::span<const double> w) const {
    const double* col = values_.data() + j * rows_;
    double acc = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) acc += w[i] * col[i] * col[i];
    return acc;
  }

  void column_axpy(std::size_t j, double alpha, std::span<double> v) const {
    const double* col = values_.data() + j * rows_;
    for (std::size_t i = 0; i < rows_; ++i) v[i] += alpha * col[i];
  }

  double column_sq_norm(std::size_t j) const {
    const double* col = values_.data() + j * rows_;
    double acc = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) acc += col[i] * col[i];
    return acc;
  }

 private:
  std::size_t rows_, cols_;
  std::vector<double> values_;
};

namespace detail {

struct CdOptions {
  bool repair = true;    // re-add screened-out KKT violators and re-solve
  bool kkt_all = true;   // certify KKT over all coordinates, not just eligible
};

// One penalized logistic fit.  IRLS outer loop; the inner loop cycles the
// eligible coordinates of the working least-squares problem: a full
// eligible sweep, then active-set sweeps to convergence, repeated until a
// full sweep moves nothing.  Weights are clamped at cfg.weight_floor and
// fitted probabilities within weight_floor of 0/1 are snapped to the
// boundary (so near-separated working responses stay finite).  Exact mu is
// used for objectives and KKT certificates.
//
// Never throws on non-convergence; diag.converged reports it.
template <LassoDesign D>
CdFit cd_fit_logistic(const D& design, std::span<const double> y,
                      std::span<const double> pf, double lambda,
                      std::span<const double> warm,
                      const std::vector<std::uint8_t>* screen_mask,
                      const SolverConfig& cfg, const CdOptions& opts = {}) {
  const std::size_t n = design.rows();
  const std::size_t n_feat = design.cols();
  if (y.size() != n || pf.size() != n_feat) {
    throw DimensionError("cd_fit_logistic dimension mismatch");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("lambda must be finite and >= 0");
  }
  if (!warm.empty() && warm.size() != n_feat) {
    throw DimensionError("warm start length mismatch");
  }

  CdFit out;
  std::vector<double>& beta = out.beta;
  beta.assign(n_feat, 0.0);
  if (!warm.empty()) beta.assign(warm.begin(), warm.end());
  SolveDiagnostics& diag = out.diag;

  std::vector<std::uint8_t> eligible(n_feat, 1);
  if (screen_mask) {
    eligible = *screen_mask;
    for (std::size_t j = 0; j < n_feat; ++j) {
      if (pf[j] == 0.0 || beta[j] != 0.0) eligible[j] = 1;
      if (pf[j] != 0.0 && !eligible[j]) ++diag.screened_out;
    }
  }

  const double eps = cfg.weight_floor;
  const double kkt_tol = kkt_tolerance(cfg);
  const double inv_n = 1.0 / static_cast<double>(n);
  // Working tolerance for the sweep criterion max_j a_j (delta_j)^2.  The
  // KKT certificate is the actual convergence gate; when it fails while the
  // sweeps have stalled, the working tolerance tightens and iteration
  // continues (ill-conditioned fits need sharper inner solves than the
  // default sweep criterion delivers).
  double work_tol = cfg.tol;

  std::vector<double> eta(n), w(n), r(n), a(n_feat, 0.0);
  std::vector<std::uint8_t> a_valid(n_feat, 0);
  std::vector<double> beta_round(n_feat), grad(n_feat), resid(n);

  auto objective = [&]() {
    double smooth = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      smooth += softplus(eta[k]) - y[k] * eta[k];
    }
    double pen = 0.0;
    for (std::size_t j = 0; j < n_feat; ++j) {
      if (pf[j] != 0.0 && beta[j] != 0.0) pen += pf[j] * std::abs(beta[j]);
    }
    return smooth * inv_n + lambda * pen;
  };

  // Returns a_j * delta^2 for the update of coordinate j on the working
  // problem; residual r is kept equal to z - D beta throughout.
  auto update_coord = [&](std::size_t j) {
    if (!a_valid[j]) {
      a[j] = design.column_weighted_sq_norm(j, w) * inv_n;
      a_valid[j] = 1;
    }
    const double aj = a[j];
    if (aj <= 0.0) {
      // Empty column: the loss ignores it, the penalized optimum is zero.
      if (pf[j] != 0.0) beta[j] = 0.0;
      return 0.0;
    }
    const double g = design.column_dot2(j, w, r) * inv_n;
    const double u = g + aj * beta[j];
    const double next =
        pf[j] != 0.0 ? soft_threshold(u, lambda * pf[j]) / aj : u / aj;
    const double delta = next - beta[j];
    if (delta == 0.0) return 0.0;
    design.column_axpy(j, -delta, r);
    beta[j] = next;
    return aj * delta * delta;
  };

  design.matvec(beta, eta);
  double obj = objective();
  if (cfg.track_objective) diag.objective_trace.push_back(obj);

  bool budget_ok = true;
  while (diag.outer_iterations < cfg.max_outer && budget_ok) {
    ++diag.outer_iterations;

    // IRLS working quantities at the current iterate.
    for (std::size_t k = 0; k < n; ++k) {
      const double mu = logistic(eta[k]);
      double wk, mu_c;
      if (mu < eps) {
        mu_c = 0.0;
        wk = eps;
      } else if (mu > 1.0 - eps) {
        mu_c = 1.0;
        wk = eps;
      } else {
        mu_c = mu;
        wk = mu * (1.0 - mu);
      }
      w[k] = wk;
      r[k] = (y[k] - mu_c) / wk;  // residual of the working response
    }
    std::fill(a_valid.begin(), a_valid.end(), 0);
    beta_round = beta;

    // Inner coordinate descent.
    while (true) {
      double dmax = 0.0;
      for (std::size_t j = 0; j < n_feat; ++j) {
        if (eligible[j]) dmax = std::max(dmax, update_coord(j));
      }
      if (++diag.sweeps > cfg.max_inner) {
        budget_ok = false;
        break;
      }
      if (dmax < work_tol) break;
      while (true) {
        double dact = 0.0;
        for (std::size_t j = 0; j < n_feat; ++j) {
          if (eligible[j] && (beta[j] != 0.0 || pf[j] == 0.0)) {
            dact = std::max(dact, update_coord(j));
          }
        }
        if (++diag.sweeps > cfg.max_inner) {
          budget_ok = false;
          break;
        }
        if (dact < work_tol) break;
      }
      if (!budget_ok) break;
    }

    // Accept the round, halving back toward the previous iterate if the
    // penalized objective worsened (IRLS is not globally monotone).
    design.matvec(beta, eta);
    double obj_new = objective();
    int halvings = 0;
    while (obj_new > obj + cfg.tol && halvings < 10) {
      for (std::size_t j = 0; j < n_feat; ++j) {
        beta[j] = 0.5 * (beta[j] + beta_round[j]);
      }
      design.matvec(beta, eta);
      obj_new = objective();
      ++halvings;
    }
    if (halvings == 10 && obj_new > obj + cfg.tol) ++diag.nonmonotone_rounds;
    obj = obj_new;
    if (cfg.track_objective) diag.objective_trace.push_back(obj);
    if (!budget_ok) break;

    double dround = 0.0;
    for (std::size_t j = 0; j < n_feat; ++j) {
      if (beta[j] != beta_round[j]) {
        if (!a_valid[j]) {
          a[j] = design.column_weighted_sq_norm(j, w) * inv_n;
          a_valid[j] = 1;
        }
        const double d = beta[j] - beta_round[j];
        dround = std::max(dround, a[j] * d * d);
      }
    }
    if (dround >= work_tol) continue;

    // Candidate convergence: certify KKT with exact probabilities.
    for (std::size_t k = 0; k < n; ++k) resid[k] = y[k] - logistic(eta[k]);
    design.rmatvec(resid, grad);
    double kkt_max = 0.0;
    bool readded = false;
    for (std::size_t j = 0; j < n_feat; ++j) {
      const double gj = grad[j] * inv_n;
      double viol;
      if (pf[j] == 0.0) {
        viol = std::abs(gj);
      } else if (beta[j] == 0.0) {
        viol = std::max(0.0, std::abs(gj) - lambda * pf[j]);
        if (!opts.kkt_all && !eligible[j]) viol = 0.0;
        if (opts.repair && viol > cfg.tol && !eligible[j]) {
          eligible[j] = 1;
          readded = true;
          ++diag.kkt_readded;
        }
      } else {
        viol = std::abs(gj - lambda * pf[j] * (beta[j] > 0.0 ? 1.0 : -1.0));
      }
      kkt_max = std::max(kkt_max, viol);
    }
    diag.kkt_max_violation = kkt_max;
    if (readded) continue;
    if (kkt_max <= kkt_tol) {
      diag.converged = true;
      break;
    }
    work_tol = std::max(work_tol * 0.01, 1e-18);
  }

  if (!diag.converged) {
    // Record the certificate of the final iterate for error reporting.
    for (std::size_t k = 0; k < n; ++k) resid[k] = y[k] - logistic(eta[k]);
    design.rmatvec(resid, grad);
    double kkt_max = 0.0;
    for (std::size_t j = 0; j < n_feat; ++j) {
      const double gj = grad[j] * inv_n;
      double viol;
      if (pf[j] == 0.0) {
        viol = std::abs(gj);
      } else if (beta[j] == 0.0) {
        viol = std::max(0.0, std::abs(gj) - lambda * pf[j]);
        if (!opts.kkt_all && !eligible[j]) viol = 0.0;
      } else {
        viol = std::abs(gj - lambda * pf[j] * (beta[j] > 0.0 ? 1.0 : -1.0));
      }
      kkt_max = std::max(kkt_max, viol);
    }
    diag.kkt_max_violation = kkt_max;
  }

  for (std::size_t j = 0; j < n_feat; ++j) {
    if (pf[j] == 0.0 && std::abs(beta[j]) > 30.0) {
      diag.separation_warning = true;
      break;
    }
  }
  return out;
}

// Null model: unpenalized coordinates only.  The lambda value is irrelevant
// because no penalized coordinate is eligible and repair is off.
template <LassoDesign D>
CdFit cd_fit_null(const D& design, std::span<const double> y,
                  std::span<const double> pf, const SolverConfig& cfg) {
  std::vector<std::uint8_t> mask(design.cols(), 0);
  for (std::size_t j = 0; j < design.cols(); ++j) {
    if (pf[j] == 0.0) mask[j] = 1;
  }
  CdOptions opts;
  opts.repair = false;
  opts.kkt_all = false;
  return cd_fit_logistic(design, y, pf, /*lambda=*/1.0, {}, &mask, cfg, opts);
}

// Gradient of the averaged loss at beta: (1/n) D'(y - mu(D beta)).
template <LassoDesign D>
std::vector<double> loss_gradient(const D& design, std::span<const double> y,
                                  std::span<const double> beta) {
  const std::size_t n = design.rows();
  std::vector<double> eta(n);
  design.matvec(beta, eta);
  std::vector<double> resid(n);
  for (std::size_t k = 0; k < n; ++k) resid[k] = y[k] - logistic(eta[k]);
  std::vector<double> grad(design.cols());
  design.rmatvec(resid, grad);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& g : grad) g *= inv_n;
  return grad;
}

template <LassoDesign D>
std::vector<std::uint8_t> strong_rule_mask(const D& design, std::span<const double> y,
                                           std::span<const double> pf,
                                           std::span<const double> beta_prev,
                                           double lambda_prev, double lambda_cur) {
  const std::vector<double> grad = loss_gradient(design, y, beta_prev);
  std::vector<std::uint8_t> mask(design.cols(), 1);
  const double bound = 2.0 * lambda_cur - lambda_prev;
  for (std::size_t j = 0; j < design.cols(); ++j) {
    if (pf[j] == 0.0 || beta_prev[j] != 0.0) continue;
    if (std::abs(grad[j]) < pf[j] * bound) mask[j] = 0;
  }
  return mask;
}

// Warm-started path over a decreasing grid.  Auto grid (when cfg.lambda_grid
// is empty) spans [ratio * lambda_max, lambda_max] log-spaced.  When
// stop_on_failure, a non-converged lambda throws PathConvergenceError with
// the partial path; otherwise the best iterate is recorded and the path
// continues (node-wise fits under separation want this).
template <LassoDesign D>
PathSolution cd_path_logistic(const D& design, std::span<const double> y,
                              std::span<const double> pf, const SolverConfig& cfg,
                              bool stop_on_failure = true) {
  using clock = std::chrono::steady_clock;
  PathSolution path;
  path.n_features = design.cols();

  const CdFit null_fit = cd_fit_null(design, y, pf, cfg);
  const std::vector<double> grad0 = loss_gradient(design, y, null_fit.beta);
  double lam_max = 0.0;
  for (std::size_t j = 0; j < design.cols(); ++j) {
    if (pf[j] != 0.0) lam_max = std::max(lam_max, std::abs(grad0[j]) / pf[j]);
  }

  std::vector<double> grid = cfg.lambda_grid;
  if (grid.empty()) {
    if (!(lam_max > 0.0)) {
      throw DegenerateInputError("auto grid needs a positive lambda_max");
    }
    grid = auto_lambda_grid(lam_max, cfg.grid_count, cfg.grid_ratio);
  } else {
    check_lambda_grid(grid);
  }

  std::vector<double> beta_prev = null_fit.beta;
  double lambda_prev = std::max(lam_max, grid.front());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double lambda = grid[i];
    const auto t0 = clock::now();
    std::vector<std::uint8_t> mask;
    const std::vector<std::uint8_t>* mask_ptr = nullptr;
    if (cfg.screening == Screening::strong) {
      mask = strong_rule_mask(design, y, pf, beta_prev, lambda_prev, lambda);
      mask_ptr = &mask;
    }
    CdFit fit = cd_fit_logistic(design, y, pf, lambda, beta_prev, mask_ptr, cfg);
    fit.diag.wall_time_ns =
        std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - t0)
            .count();
    if (!fit.diag.converged && stop_on_failure) {
      throw PathConvergenceError(
          "solver did not converge at grid index " + std::to_string(i) +
              " (lambda=" + std::to_string(lambda) +
              ", kkt=" + std::to_string(fit.diag.kkt_max_violation) + ")",
          std::move(path), i);
    }
    beta_prev = fit.beta;
    lambda_prev = lambda;
    path.lambdas.push_back(lambda);
    path.coefficients.push_back(std::move(fit.beta));
    path.diagnostics.push_back(std::move(fit.diag));
  }
  return path;
}

}  // namespace detail
}  // namespace bpmn
