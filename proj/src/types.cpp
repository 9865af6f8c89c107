#include "bpmn/types.hpp"

#include <cmath>

namespace bpmn {

namespace {

void check_entry_finite(double value) {
  if (!std::isfinite(value)) {
    throw ValidationError("ThetaMatrix entries must be finite");
  }
}

}  // namespace

ThetaMatrix::ThetaMatrix(std::size_t p) : p_(p), values_(p * p, 0.0) {
  if (p == 0) throw DimensionError("ThetaMatrix requires p >= 1");
}

ThetaMatrix::ThetaMatrix(std::size_t p, std::vector<double> row_major)
    : p_(p), values_(std::move(row_major)) {
  if (p == 0) throw DimensionError("ThetaMatrix requires p >= 1");
  if (values_.size() != p * p) {
    throw DimensionError("ThetaMatrix storage size does not match p*p");
  }
  for (std::size_t s = 0; s < p_; ++s) {
    for (std::size_t t = 0; t < p_; ++t) {
      check_entry_finite(values_[s * p_ + t]);
      if (values_[s * p_ + t] != values_[t * p_ + s]) {
        throw ValidationError("ThetaMatrix must be symmetric");
      }
    }
  }
}

void ThetaMatrix::set(std::size_t s, std::size_t t, double value) {
  if (s >= p_ || t >= p_) throw DimensionError("ThetaMatrix index out of range");
  check_entry_finite(value);
  values_[s * p_ + t] = value;
  values_[t * p_ + s] = value;
}

std::size_t ThetaMatrix::edge_count() const {
  std::size_t count = 0;
  for (std::size_t s = 0; s < p_; ++s) {
    for (std::size_t t = s + 1; t < p_; ++t) {
      if (values_[s * p_ + t] != 0.0) ++count;
    }
  }
  return count;
}

SampleMatrix::SampleMatrix(std::size_t n, std::size_t p,
                           std::vector<std::uint8_t> row_major)
    : n_(n), p_(p), values_(std::move(row_major)) {
  if (n == 0 || p == 0) throw DimensionError("SampleMatrix requires N >= 1, p >= 1");
  if (values_.size() != n * p) {
    throw DimensionError("SampleMatrix storage size does not match N*p");
  }
  for (const std::uint8_t v : values_) {
    if (v > 1) throw ValidationError("SampleMatrix entries must be 0 or 1");
  }
}

double SampleMatrix::column_mean(std::size_t j) const {
  return static_cast<double>(column_ones(j)) / static_cast<double>(n_);
}

std::size_t SampleMatrix::column_ones(std::size_t j) const {
  if (j >= p_) throw DimensionError("SampleMatrix column out of range");
  std::size_t count = 0;
  for (std::size_t i = 0; i < n_; ++i) count += values_[i * p_ + j];
  return count;
}

SampleMatrix SampleMatrix::subset(std::span<const std::size_t> rows) const {
  std::vector<std::uint8_t> out;
  out.reserve(rows.size() * p_);
  for (const std::size_t i : rows) {
    if (i >= n_) throw DimensionError("SampleMatrix subset row out of range");
    out.insert(out.end(), values_.begin() + static_cast<std::ptrdiff_t>(i * p_),
               values_.begin() + static_cast<std::ptrdiff_t>((i + 1) * p_));
  }
  return SampleMatrix(rows.size(), p_, std::move(out));
}

ObjectiveValue make_objective(double loglik_part, double penalty_part) {
  if (penalty_part < 0.0) throw ValidationError("penalty_part must be >= 0");
  return ObjectiveValue{loglik_part, penalty_part, loglik_part - penalty_part};
}

}  // namespace bpmn
