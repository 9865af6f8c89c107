#pragma once

#include <cstdint>
#include <span>

#include "bpmn/types.hpp"

namespace bpmn {

// Exact evaluation of the model objectives.  Everything here is a pure
// function of its inputs and safe to call concurrently.
//
// Conventions: x in {0,1}^p, Theta symmetric.  The energy of a state is
//   E(x) = sum_s theta_ss x_s + sum_{s<t} theta_st x_s x_t,
// i.e. each unordered pair enters once and x_s^2 = x_s folds the diagonal
// into linear terms.

// Largest p for which 2^p enumeration is allowed.
inline constexpr std::size_t kEnumerationLimit = 25;

// log Z = log sum_x exp(E(x)), streaming log-sum-exp over a Gray-code walk.
double log_partition(const ThetaMatrix& theta);

// P(x) = exp(E(x) - log Z).  Sums to one over {0,1}^p.
double joint_pmf(const ThetaMatrix& theta, std::span<const std::uint8_t> x);

// Per-vertex log normalizer of the conditional:
//   Psi_s(x; Theta) = log[1 + exp(theta_ss + sum_{t != s} x_t theta_st)].
double psi_s(const ThetaMatrix& theta, std::span<const std::uint8_t> x, std::size_t s);

// Penalized pseudo-likelihood.  loglik_part sums the per-sample, per-vertex
// conditional log-likelihoods; penalty_part = N * lambda * sum_{t>s} |theta_st|
// (diagonal unpenalized, each unordered pair once).
ObjectiveValue pseudo_likelihood(const ThetaMatrix& theta, const SampleMatrix& x,
                                 double lambda);

// Gradient of the smooth part of pseudo_likelihood with respect to the
// packed symmetric parameterization: the (s,t) entry is the derivative of
// the shared coefficient theta_st (both conditionals containing it
// contribute), the diagonal entry the derivative of theta_ss.
ThetaMatrix pseudo_likelihood_gradient(const ThetaMatrix& theta, const SampleMatrix& x);

// Penalized exact log-likelihood (enumeration-guarded):
//   sum_{t>=s} theta_st (X'X)_st - N Psi(Theta) - (N lambda / 2) sum_{s!=t} |theta_st|.
// The ordered-pair penalty halves to the t>s form for symmetric Theta.
ObjectiveValue penalized_log_likelihood(const ThetaMatrix& theta, const SampleMatrix& x,
                                        double lambda);

}  // namespace bpmn
