#include "bpmn/model.hpp"

#include <bit>
#include <cmath>

#include "bpmn/math.hpp"

namespace bpmn {

namespace {

void check_enumeration_guard(std::size_t p) {
  if (p > kEnumerationLimit) {
    throw DimensionError("exact enumeration requires p <= 25");
  }
}

void check_same_p(const ThetaMatrix& theta, const SampleMatrix& x) {
  if (theta.p() != x.p()) {
    throw DimensionError("ThetaMatrix and SampleMatrix disagree on p");
  }
}

double state_energy(const ThetaMatrix& theta, std::span<const std::uint8_t> x) {
  const std::size_t p = theta.p();
  double energy = 0.0;
  for (std::size_t s = 0; s < p; ++s) {
    if (!x[s]) continue;
    energy += theta(s, s);
    for (std::size_t t = s + 1; t < p; ++t) {
      if (x[t]) energy += theta(s, t);
    }
  }
  return energy;
}

// Linear predictor of vertex s's conditional:
//   eta_s(x) = theta_ss + sum_{t != s} x_t theta_st.
double conditional_linear(const ThetaMatrix& theta, std::span<const std::uint8_t> x,
                          std::size_t s) {
  const std::size_t p = theta.p();
  double eta = theta(s, s);
  for (std::size_t t = 0; t < p; ++t) {
    if (t != s && x[t]) eta += theta(s, t);
  }
  return eta;
}

double pair_penalty(const ThetaMatrix& theta) {
  const std::size_t p = theta.p();
  double sum = 0.0;
  for (std::size_t s = 0; s < p; ++s) {
    for (std::size_t t = s + 1; t < p; ++t) sum += std::abs(theta(s, t));
  }
  return sum;
}

}  // namespace

double log_partition(const ThetaMatrix& theta) {
  const std::size_t p = theta.p();
  check_enumeration_guard(p);

  // Gray-code walk: one bit flips per visited state, so the energy is
  // maintained incrementally at O(p) per state.
  std::vector<std::uint8_t> x(p, 0);
  double energy = 0.0;
  LogSumExp acc;
  acc.add(energy);
  const std::uint64_t n_states = std::uint64_t{1} << p;
  for (std::uint64_t k = 1; k < n_states; ++k) {
    const auto bit = static_cast<std::size_t>(std::countr_zero(k));
    x[bit] ^= 1;
    double delta = theta(bit, bit);
    for (std::size_t t = 0; t < p; ++t) {
      if (t != bit && x[t]) delta += theta(bit, t);
    }
    energy += x[bit] ? delta : -delta;
    acc.add(energy);
  }
  return acc.value();
}

double joint_pmf(const ThetaMatrix& theta, std::span<const std::uint8_t> x) {
  if (x.size() != theta.p()) {
    throw DimensionError("state vector length does not match p");
  }
  return std::exp(state_energy(theta, x) - log_partition(theta));
}

double psi_s(const ThetaMatrix& theta, std::span<const std::uint8_t> x, std::size_t s) {
  if (x.size() != theta.p()) {
    throw DimensionError("state vector length does not match p");
  }
  if (s >= theta.p()) throw DimensionError("vertex index out of range");
  return softplus(conditional_linear(theta, x, s));
}

ObjectiveValue pseudo_likelihood(const ThetaMatrix& theta, const SampleMatrix& x,
                                 double lambda) {
  check_same_p(theta, x);
  if (lambda < 0.0) throw ValidationError("lambda must be >= 0");

  const std::size_t p = theta.p();
  const std::size_t n = x.n();
  // Vertex-major accumulation matches the stacked-problem row order, so the
  // two evaluation routes sum the same terms in the same order.
  double loglik = 0.0;
  for (std::size_t s = 0; s < p; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = x.row(i);
      const double eta = conditional_linear(theta, row, s);
      if (row[s]) loglik += eta;
      loglik -= softplus(eta);
    }
  }
  const double penalty = static_cast<double>(n) * lambda * pair_penalty(theta);
  return make_objective(loglik, penalty);
}

ThetaMatrix pseudo_likelihood_gradient(const ThetaMatrix& theta, const SampleMatrix& x) {
  check_same_p(theta, x);
  const std::size_t p = theta.p();
  const std::size_t n = x.n();

  // residual_{is} = X_is - sigma(eta_is)
  std::vector<double> residual(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = x.row(i);
    for (std::size_t s = 0; s < p; ++s) {
      residual[i * p + s] =
          static_cast<double>(row[s]) - logistic(conditional_linear(theta, row, s));
    }
  }

  // d/dtheta_st = sum_i [X_it (X_is - sigma(eta_is)) + X_is (X_it - sigma(eta_it))],
  // d/dtheta_ss = sum_i [X_is - sigma(eta_is)].
  ThetaMatrix grad(p);
  for (std::size_t s = 0; s < p; ++s) {
    double diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) diag += residual[i * p + s];
    grad.set(s, s, diag);
    for (std::size_t t = s + 1; t < p; ++t) {
      double g = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = x.row(i);
        if (row[t]) g += residual[i * p + s];
        if (row[s]) g += residual[i * p + t];
      }
      grad.set(s, t, g);
    }
  }
  return grad;
}

ObjectiveValue penalized_log_likelihood(const ThetaMatrix& theta, const SampleMatrix& x,
                                        double lambda) {
  check_same_p(theta, x);
  if (lambda < 0.0) throw ValidationError("lambda must be >= 0");
  check_enumeration_guard(theta.p());

  const std::size_t p = theta.p();
  const std::size_t n = x.n();
  double loglik = 0.0;
  for (std::size_t s = 0; s < p; ++s) {
    // (X'X)_ss = count of ones in column s since entries are binary.
    std::size_t gram_ss = 0;
    for (std::size_t i = 0; i < n; ++i) gram_ss += x(i, s);
    loglik += theta(s, s) * static_cast<double>(gram_ss);
    for (std::size_t t = s + 1; t < p; ++t) {
      std::size_t gram_st = 0;
      for (std::size_t i = 0; i < n; ++i) gram_st += x(i, s) & x(i, t);
      loglik += theta(s, t) * static_cast<double>(gram_st);
    }
  }
  loglik -= static_cast<double>(n) * log_partition(theta);
  const double penalty = static_cast<double>(n) * lambda * pair_penalty(theta);
  return make_objective(loglik, penalty);
}

}  // namespace bpmn
