#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bpmn {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mismatched or out-of-range dimensions / indices.
struct DimensionError : Error {
  using Error::Error;
};

// Invalid values: non-binary samples, asymmetric or non-finite parameters,
// bad configuration.
struct ValidationError : Error {
  using Error::Error;
};

// Inputs that make the requested quantity undefined (constant response,
// empty or full truth edge set, zero reference norm).
struct DegenerateInputError : Error {
  using Error::Error;
};

// No grid point satisfies the selection constraint.
struct InfeasibleError : Error {
  using Error::Error;
};

// Symmetric p x p parameter matrix.  Diagonal entries are the node
// potentials, off-diagonal entries the edge weights.  Symmetry and
// finiteness are enforced on construction and on every mutation.
class ThetaMatrix {
 public:
  explicit ThetaMatrix(std::size_t p);
  ThetaMatrix(std::size_t p, std::vector<double> row_major);

  std::size_t p() const { return p_; }

  double operator()(std::size_t s, std::size_t t) const {
    return values_[s * p_ + t];
  }

  // Sets theta_st and theta_ts together.
  void set(std::size_t s, std::size_t t, double value);

  std::span<const double> data() const { return values_; }

  // Number of nonzero strictly-upper-triangular entries.
  std::size_t edge_count() const;

  bool operator==(const ThetaMatrix& other) const = default;

 private:
  std::size_t p_;
  std::vector<double> values_;
};

// N x p matrix of {0,1} observations, row-major.
class SampleMatrix {
 public:
  SampleMatrix(std::size_t n, std::size_t p, std::vector<std::uint8_t> row_major);

  std::size_t n() const { return n_; }
  std::size_t p() const { return p_; }

  std::uint8_t operator()(std::size_t i, std::size_t j) const {
    return values_[i * p_ + j];
  }

  std::span<const std::uint8_t> row(std::size_t i) const {
    return {values_.data() + i * p_, p_};
  }

  std::span<const std::uint8_t> data() const { return values_; }

  double column_mean(std::size_t j) const;
  std::size_t column_ones(std::size_t j) const;

  // Row subset (for subsampled refits); indices must be in range.
  SampleMatrix subset(std::span<const std::size_t> rows) const;

  bool operator==(const SampleMatrix& other) const = default;

 private:
  std::size_t n_;
  std::size_t p_;
  std::vector<std::uint8_t> values_;
};

// Objective split under the maximization convention:
// total = loglik_part - penalty_part, penalty_part >= 0.
struct ObjectiveValue {
  double loglik_part = 0.0;
  double penalty_part = 0.0;
  double total = 0.0;
};

ObjectiveValue make_objective(double loglik_part, double penalty_part);

}  // namespace bpmn
