#include "bpmn/estimators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "bpmn/cd_core.hpp"
#include "bpmn/math.hpp"
#include "bpmn/model.hpp"
#include "bpmn/parallel.hpp"
#include "bpmn/rng.hpp"
#include "bpmn/transform.hpp"

namespace bpmn {

namespace {

using clock = std::chrono::steady_clock;

std::int64_t elapsed_ns(clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - t0)
      .count();
}

void check_lambdas(const std::vector<double>& lambdas, bool allow_zero) {
  if (lambdas.empty()) throw ValidationError("lambda list must be nonempty");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double lo = allow_zero ? 0.0 : std::nextafter(0.0, 1.0);
    if (!(lambdas[i] >= lo) || !std::isfinite(lambdas[i])) {
      throw ValidationError("lambdas must be finite and positive");
    }
    if (i > 0 && lambdas[i] >= lambdas[i - 1]) {
      throw ValidationError("lambdas must be strictly decreasing");
    }
  }
}

void score_estimate(FitReport& report, const SampleMatrix& x) {
  report.objective.reserve(report.estimates.size());
  for (std::size_t i = 0; i < report.estimates.size(); ++i) {
    report.objective.push_back(
        pseudo_likelihood(report.estimates[i], x, report.lambdas[i].lambda_pl));
  }
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::plg: return "plg";
    case Method::nlr: return "nlr";
    case Method::direct_pl: return "direct";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  if (name == "plg") return Method::plg;
  if (name == "nlr") return Method::nlr;
  if (name == "direct" || name == "direct_pl") return Method::direct_pl;
  throw ValidationError("unknown method: " + name);
}

FitReport fit_plg(const SampleMatrix& x, const std::vector<double>& lambdas,
                  const SolverConfig& cfg) {
  check_lambdas(lambdas, /*allow_zero=*/false);
  const auto p = static_cast<double>(x.p());

  FitReport report;
  report.method = Method::plg;

  const auto t_build = clock::now();
  const StackedProblem sp = build_stacked(x);
  const std::int64_t build_ns = elapsed_ns(t_build);

  SolverConfig path_cfg = cfg;
  path_cfg.lambda_grid.clear();
  for (const double lam : lambdas) path_cfg.lambda_grid.push_back(lam / p);

  PathSolution path = fit_path(sp, path_cfg);
  for (std::size_t i = 0; i < path.lambdas.size(); ++i) {
    const double lam = lambdas[i];
    report.lambdas.push_back({lam, lam / p, lam});
    report.estimates.push_back(
        devectorize(ThetaVector{x.p(), path.coefficients[i]}));
    const SolveDiagnostics& d = path.diagnostics[i];
    report.wall_time_ns.push_back(d.wall_time_ns + (i == 0 ? build_ns : 0));
    report.outer_iterations.push_back(d.outer_iterations);
    report.sweeps.push_back(d.sweeps);
    report.kkt_max_violation.push_back(d.kkt_max_violation);
    report.converged.push_back(d.converged);
    if (d.separation_warning) {
      report.warnings.push_back("separation warning at lambda=" +
                                std::to_string(lam));
    }
  }
  score_estimate(report, x);
  return report;
}

FitReport fit_nlr(const SampleMatrix& x, const std::vector<double>& lambdas,
                  const SolverConfig& cfg, Symmetrize rule, int threads) {
  check_lambdas(lambdas, /*allow_zero=*/false);
  const std::size_t n = x.n();
  const std::size_t p = x.p();
  if (p < 2) throw DimensionError("node-wise fit requires p >= 2");

  SolverConfig node_cfg = cfg;
  node_cfg.lambda_grid = lambdas;

  // One regression per vertex.  Column s of the node-s design carries the
  // intercept (ones, unpenalized); column t != s carries X_t.
  struct NodeFit {
    PathSolution path;
    std::vector<std::string> warnings;
    std::int64_t setup_ns = 0;
  };
  std::vector<NodeFit> nodes(p);
  parallel_for(p, threads, [&](std::size_t s) {
    const auto t0 = clock::now();
    DenseDesign design(n, p);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<double>(x(i, s));
      for (std::size_t t = 0; t < p; ++t) {
        design.at(i, t) = (t == s) ? 1.0 : static_cast<double>(x(i, t));
      }
    }
    std::vector<double> pf(p, 1.0);
    pf[s] = 0.0;
    nodes[s].setup_ns = elapsed_ns(t0);
    nodes[s].path = detail::cd_path_logistic(design, y, pf, node_cfg,
                                             /*stop_on_failure=*/false);
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      const SolveDiagnostics& d = nodes[s].path.diagnostics[i];
      if (!d.converged) {
        nodes[s].warnings.push_back(
            "node " + std::to_string(s + 1) + " did not converge at lambda=" +
            std::to_string(lambdas[i]) +
            " (kkt=" + std::to_string(d.kkt_max_violation) + ")");
      } else if (d.separation_warning) {
        nodes[s].warnings.push_back("node " + std::to_string(s + 1) +
                                    " separation warning at lambda=" +
                                    std::to_string(lambdas[i]));
      }
    }
  });

  FitReport report;
  report.method = Method::nlr;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double lam = lambdas[i];
    report.lambdas.push_back({lam, lam, 2.0 * lam});

    ThetaMatrix estimate(p);
    double max_asym = 0.0;
    for (std::size_t s = 0; s < p; ++s) {
      estimate.set(s, s, nodes[s].path.coefficients[i][s]);
    }
    for (std::size_t s = 0; s < p; ++s) {
      for (std::size_t t = s + 1; t < p; ++t) {
        const double a_st = nodes[s].path.coefficients[i][t];
        const double a_ts = nodes[t].path.coefficients[i][s];
        max_asym = std::max(max_asym, std::abs(a_st - a_ts));
        double combined = 0.0;
        switch (rule) {
          case Symmetrize::mean:
            combined = 0.5 * (a_st + a_ts);
            break;
          case Symmetrize::and_rule:
            combined = (a_st != 0.0 && a_ts != 0.0) ? 0.5 * (a_st + a_ts) : 0.0;
            break;
          case Symmetrize::or_rule:
            if (a_st != 0.0 && a_ts != 0.0) {
              combined = 0.5 * (a_st + a_ts);
            } else if (a_st != 0.0 || a_ts != 0.0) {
              combined = a_st + a_ts;  // the one nonzero side
            }
            break;
        }
        estimate.set(s, t, combined);
      }
    }
    report.estimates.push_back(std::move(estimate));
    report.asymmetry.push_back(max_asym);

    std::int64_t ns = 0;
    std::size_t outer = 0, sweeps = 0;
    double kkt = 0.0;
    bool all_converged = true;
    for (std::size_t s = 0; s < p; ++s) {
      const SolveDiagnostics& d = nodes[s].path.diagnostics[i];
      ns += d.wall_time_ns + (i == 0 ? nodes[s].setup_ns : 0);
      outer += d.outer_iterations;
      sweeps += d.sweeps;
      kkt = std::max(kkt, d.kkt_max_violation);
      all_converged = all_converged && d.converged;
    }
    report.wall_time_ns.push_back(ns);
    report.outer_iterations.push_back(outer);
    report.sweeps.push_back(sweeps);
    report.kkt_max_violation.push_back(kkt);
    report.converged.push_back(all_converged);
  }
  for (const auto& node : nodes) {
    report.warnings.insert(report.warnings.end(), node.warnings.begin(),
                           node.warnings.end());
  }
  score_estimate(report, x);
  return report;
}

namespace {

// Largest eigenvalue of D'D via power iteration on the implicit products;
// the logistic-loss Hessian at Theta = 0 is D'D / 4.
double design_top_eigenvalue(const StructuredDesign& design, std::size_t iters) {
  Rng rng(0x9e3779b9u);
  std::vector<double> v(design.cols());
  for (double& vi : v) vi = rng.uniform(-1.0, 1.0);
  std::vector<double> dv(design.rows()), dtdv(design.cols());
  double eig = 1.0;
  for (std::size_t it = 0; it < iters; ++it) {
    double norm = 0.0;
    for (const double vi : v) norm += vi * vi;
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    for (double& vi : v) vi /= norm;
    design.matvec(v, dv);
    design.rmatvec(dv, dtdv);
    eig = 0.0;
    for (const double di : dv) eig += di * di;  // v' D'D v for unit v
    v = dtdv;
  }
  return eig;
}

// Penalized pseudo-likelihood ascent by proximal gradient with Armijo
// backtracking, in the minimization convention f = -loglik, h = N lambda
// sum_{s<t} |theta_st|.  The inner product and norms live on the packed
// coordinates (pairs once + diagonal), matching the gradient convention.
struct ProxState {
  ThetaMatrix theta;
  double smooth = 0.0;  // f(theta)
};

struct ProxResult {
  explicit ProxResult(std::size_t p) : theta(p) {}
  ThetaMatrix theta;
  std::size_t iterations = 0;
  bool converged = false;
  double mapping_norm = 0.0;
};

ProxResult prox_gradient_pl(const SampleMatrix& x, double lambda,
                            const ThetaMatrix& init, double step0,
                            const DirectConfig& cfg) {
  const std::size_t p = x.p();
  const double n_lambda = static_cast<double>(x.n()) * lambda;

  ProxState cur{init, -pseudo_likelihood(init, x, 0.0).loglik_part};
  double step = step0;
  ProxResult out(p);

  for (std::size_t it = 0; it < cfg.max_iter; ++it) {
    ++out.iterations;
    const ThetaMatrix ascent = pseudo_likelihood_gradient(cur.theta, x);

    ThetaMatrix cand(p);
    double accepted_smooth = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < 60 && !accepted; ++bt) {
      for (std::size_t s = 0; s < p; ++s) {
        cand.set(s, s, cur.theta(s, s) + step * ascent(s, s));
        for (std::size_t t = s + 1; t < p; ++t) {
          cand.set(s, t, soft_threshold(cur.theta(s, t) + step * ascent(s, t),
                                        step * n_lambda));
        }
      }
      // Armijo: f(cand) <= f(cur) + <grad f, d> + ||d||^2 / (2 step).
      double lin = 0.0, quad = 0.0;
      for (std::size_t s = 0; s < p; ++s) {
        for (std::size_t t = s; t < p; ++t) {
          const double d = cand(s, t) - cur.theta(s, t);
          lin += -ascent(s, t) * d;
          quad += d * d;
        }
      }
      const double cand_smooth = -pseudo_likelihood(cand, x, 0.0).loglik_part;
      const double bound = cur.smooth + lin + quad / (2.0 * step);
      if (cand_smooth <= bound + 1e-12 * (std::abs(bound) + 1.0)) {
        accepted = true;
        accepted_smooth = cand_smooth;
      } else {
        step *= 0.5;
      }
    }
    if (!accepted) break;  // step underflow; report best iterate

    double mapping = 0.0;
    for (std::size_t s = 0; s < p; ++s) {
      for (std::size_t t = s; t < p; ++t) {
        mapping = std::max(mapping, std::abs(cand(s, t) - cur.theta(s, t)) / step);
      }
    }
    cur.theta = cand;
    cur.smooth = accepted_smooth;
    out.mapping_norm = mapping;
    if (mapping < cfg.tol) {
      out.converged = true;
      break;
    }
    step = std::min(step * cfg.step_growth, step0);
  }
  out.theta = cur.theta;
  return out;
}

}  // namespace

FitReport fit_direct_pl(const SampleMatrix& x, const std::vector<double>& lambdas,
                        const DirectConfig& cfg) {
  check_lambdas(lambdas, /*allow_zero=*/true);
  const std::size_t p = x.p();
  if (p < 2) throw DimensionError("direct fit requires p >= 2");

  const StackedProblem sp = build_stacked(x);
  const double lipschitz =
      std::max(design_top_eigenvalue(sp.design, cfg.power_iters) / 4.0, 1e-8);
  const double step0 = 1.0 / lipschitz;

  FitReport report;
  report.method = Method::direct_pl;
  ThetaMatrix warm(p);
  for (const double lam : lambdas) {
    const auto t0 = clock::now();
    const ProxResult res = prox_gradient_pl(x, lam, warm, step0, cfg);
    report.wall_time_ns.push_back(elapsed_ns(t0));
    report.lambdas.push_back({lam, lam, lam});
    report.estimates.push_back(res.theta);
    report.outer_iterations.push_back(res.iterations);
    report.sweeps.push_back(res.iterations);
    report.kkt_max_violation.push_back(res.mapping_norm);
    report.converged.push_back(res.converged);
    if (!res.converged) {
      report.warnings.push_back(
          "proximal gradient hit the iteration budget at lambda=" +
          std::to_string(lam) + " (mapping=" + std::to_string(res.mapping_norm) +
          "); best iterate returned");
    }
    warm = res.theta;
  }
  score_estimate(report, x);
  return report;
}

double relative_difference(const ThetaMatrix& a, const ThetaMatrix& b) {
  if (a.p() != b.p()) throw DimensionError("relative_difference requires equal p");
  const ThetaVector va = vectorize(a);
  const ThetaVector vb = vectorize(b);
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < va.values.size(); ++j) {
    const double d = va.values[j] - vb.values[j];
    num += d * d;
    den += vb.values[j] * vb.values[j];
  }
  if (den == 0.0) {
    throw DegenerateInputError("relative_difference reference has zero norm");
  }
  return std::sqrt(num) / std::sqrt(den);
}

}  // namespace bpmn
