#pragma once

#include <cmath>
#include <limits>

namespace bpmn {

// log(1 + exp(z)), overflow-safe for |z| up to ~700.
inline double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

// 1 / (1 + exp(-z)) without overflow on either tail.
inline double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double logit(double prob) { return std::log(prob / (1.0 - prob)); }

// Streaming log-sum-exp with a running max shift; one pass, no overflow.
class LogSumExp {
 public:
  void add(double value) {
    if (count_ == 0 || value > max_) {
      sum_ = (count_ == 0) ? 1.0 : sum_ * std::exp(max_ - value) + 1.0;
      max_ = value;
    } else {
      sum_ += std::exp(value - max_);
    }
    ++count_;
  }

  double value() const {
    if (count_ == 0) return -std::numeric_limits<double>::infinity();
    return max_ + std::log(sum_);
  }

 private:
  double max_ = 0.0;
  double sum_ = 0.0;
  std::size_t count_ = 0;
};

}  // namespace bpmn
