#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "bpmn/types.hpp"

namespace bpmn {

// Reduction of the pseudo-likelihood problem to one stacked logistic
// regression: parameters become a vector of length m + p (m = p(p-1)/2 pair
// coefficients, then p node potentials), observations become N*p rows in
// vertex-major order (row i = N*s + n holds sample n's conditional for
// vertex s).  The design matrix is never materialized; StructuredDesign
// serves its products straight from X.

inline std::size_t pair_count(std::size_t p) { return p * (p - 1) / 2; }

// Flat position of the unordered pair {s,t} within the column-stacked upper
// triangle.  0-based; with a = min(s,t), b = max(s,t):  j = a + b(b-1)/2.
std::size_t pair_index(std::size_t s, std::size_t t, std::size_t p);

// Packed parameter vector: pair coefficients in pair_index order, then the
// p diagonal entries.
struct ThetaVector {
  std::size_t p = 0;
  std::vector<double> values;
};

ThetaVector vectorize(const ThetaMatrix& theta);
ThetaMatrix devectorize(const ThetaVector& tv);

// Implicit handle on the stacked design.  All solver access goes through
// the product interface below; the matrix itself never exists.
//
// Column j < m is the pair column for {s,t} = pair_from_index(j): its
// block-s rows carry column t of X, its block-t rows carry column s.
// Column m + s is the block-s indicator (1 on block s, 0 elsewhere).
// Every stored entry is 0 or 1.
class StructuredDesign {
 public:
  explicit StructuredDesign(SampleMatrix x);

  StructuredDesign(const StructuredDesign& other)
      : x_(other.x_), n_(other.n_), p_(other.p_), ones_(other.ones_),
        pair_s_(other.pair_s_), pair_t_(other.pair_t_),
        n_matvec_(other.n_matvec_.load()), n_rmatvec_(other.n_rmatvec_.load()) {}
  StructuredDesign(StructuredDesign&& other) noexcept
      : x_(std::move(other.x_)), n_(other.n_), p_(other.p_),
        ones_(std::move(other.ones_)), pair_s_(std::move(other.pair_s_)),
        pair_t_(std::move(other.pair_t_)), n_matvec_(other.n_matvec_.load()),
        n_rmatvec_(other.n_rmatvec_.load()) {}
  StructuredDesign& operator=(const StructuredDesign&) = delete;
  StructuredDesign& operator=(StructuredDesign&&) = delete;

  std::size_t rows() const { return n_ * p_; }
  std::size_t cols() const { return pair_count(p_) + p_; }
  std::size_t sample_count() const { return n_; }
  std::size_t vertex_count() const { return p_; }
  const SampleMatrix& samples() const { return x_; }

  // out = D u.  Row (s, n) accumulates u[m+s] + sum_{t != s} X_nt u[j_st]
  // in ascending t order, matching the direct evaluation of the linear
  // predictors bit for bit.
  void matvec(std::span<const double> u, std::span<double> out) const;

  // out = D' v.
  void rmatvec(std::span<const double> v, std::span<double> out) const;

  // d_j' v
  double column_dot(std::size_t j, std::span<const double> v) const;

  // sum_k d_kj a_k b_k
  double column_dot2(std::size_t j, std::span<const double> a,
                     std::span<const double> b) const;

  // sum_k w_k d_kj^2  (= column_dot(j, w) for a binary design)
  double column_weighted_sq_norm(std::size_t j, std::span<const double> w) const;

  // v += alpha * d_j
  void column_axpy(std::size_t j, double alpha, std::span<double> v) const;

  double column_sq_norm(std::size_t j) const;

  // Full-product counters; the solver's access pattern is asserted in tests.
  std::uint64_t matvec_count() const { return n_matvec_.load(); }
  std::uint64_t rmatvec_count() const { return n_rmatvec_.load(); }
  void reset_product_counts() const { n_matvec_ = 0; n_rmatvec_ = 0; }

 private:
  std::pair<std::size_t, std::size_t> pair_from_index(std::size_t j) const {
    return {pair_s_[j], pair_t_[j]};
  }

  SampleMatrix x_;
  std::size_t n_;
  std::size_t p_;
  std::vector<std::vector<std::uint32_t>> ones_;  // per X column, rows with a 1
  std::vector<std::uint32_t> pair_s_, pair_t_;    // pair_index -> (s, t), s < t
  mutable std::atomic<std::uint64_t> n_matvec_{0};
  mutable std::atomic<std::uint64_t> n_rmatvec_{0};
};

// The converted logistic-regression problem.
struct StackedProblem {
  StructuredDesign design;
  std::vector<double> response;         // length N*p, block s = column s of X
  std::vector<double> penalty_factors;  // 1 for pair columns, 0 for indicators
  std::size_t n_obs = 0;                // N*p
  std::size_t n_features = 0;           // m + p
  std::size_t sample_count = 0;         // N
  std::size_t vertex_count = 0;         // p
};

StackedProblem build_stacked(const SampleMatrix& x);

// y' D thetav - sum_k log(1 + exp(d_k' thetav)) - N lambda sum_{penalized j} |thetav_j|.
// Equals pseudo_likelihood(devectorize(thetav), X, lambda) exactly.
ObjectiveValue converted_objective(const StackedProblem& sp, const ThetaVector& tv,
                                   double lambda, std::size_t n_samples);

// Debug export of the materialized design in 1-based coordinate format
// (row col value per line).  Guarded: refuses when the dense size
// N*p*(m+p) exceeds max_dense_size.
void write_design_coordinates(std::ostream& os, const StackedProblem& sp,
                              std::size_t max_dense_size = 1000000);

}  // namespace bpmn
