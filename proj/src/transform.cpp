#include "bpmn/transform.hpp"

#include <cmath>
#include <ostream>

#include "bpmn/math.hpp"

namespace bpmn {

std::size_t pair_index(std::size_t s, std::size_t t, std::size_t p) {
  if (s >= p || t >= p) throw DimensionError("pair_index vertex out of range");
  if (s == t) throw DimensionError("pair_index requires s != t");
  const std::size_t a = std::min(s, t);
  const std::size_t b = std::max(s, t);
  return a + b * (b - 1) / 2;
}

ThetaVector vectorize(const ThetaMatrix& theta) {
  const std::size_t p = theta.p();
  const std::size_t m = pair_count(p);
  ThetaVector tv{p, std::vector<double>(m + p)};
  for (std::size_t t = 1; t < p; ++t) {
    for (std::size_t s = 0; s < t; ++s) tv.values[pair_index(s, t, p)] = theta(s, t);
  }
  for (std::size_t s = 0; s < p; ++s) tv.values[m + s] = theta(s, s);
  return tv;
}

ThetaMatrix devectorize(const ThetaVector& tv) {
  const std::size_t p = tv.p;
  const std::size_t m = pair_count(p);
  if (tv.values.size() != m + p) {
    throw DimensionError("ThetaVector length does not match p(p-1)/2 + p");
  }
  ThetaMatrix theta(p);
  for (std::size_t t = 1; t < p; ++t) {
    for (std::size_t s = 0; s < t; ++s) theta.set(s, t, tv.values[pair_index(s, t, p)]);
  }
  for (std::size_t s = 0; s < p; ++s) theta.set(s, s, tv.values[m + s]);
  return theta;
}

StructuredDesign::StructuredDesign(SampleMatrix x)
    : x_(std::move(x)), n_(x_.n()), p_(x_.p()) {
  if (p_ < 2) throw DimensionError("stacked design requires p >= 2");
  ones_.resize(p_);
  for (std::size_t t = 0; t < p_; ++t) {
    for (std::size_t i = 0; i < n_; ++i) {
      if (x_(i, t)) ones_[t].push_back(static_cast<std::uint32_t>(i));
    }
  }
  const std::size_t m = pair_count(p_);
  pair_s_.resize(m);
  pair_t_.resize(m);
  for (std::size_t t = 1; t < p_; ++t) {
    for (std::size_t s = 0; s < t; ++s) {
      const std::size_t j = pair_index(s, t, p_);
      pair_s_[j] = static_cast<std::uint32_t>(s);
      pair_t_[j] = static_cast<std::uint32_t>(t);
    }
  }
}

void StructuredDesign::matvec(std::span<const double> u, std::span<double> out) const {
  const std::size_t m = pair_count(p_);
  if (u.size() != cols() || out.size() != rows()) {
    throw DimensionError("matvec dimension mismatch");
  }
  ++n_matvec_;
  for (std::size_t s = 0; s < p_; ++s) {
    double* block = out.data() + s * n_;
    for (std::size_t i = 0; i < n_; ++i) {
      double acc = u[m + s];
      const std::uint8_t* row = x_.data().data() + i * p_;
      for (std::size_t t = 0; t < p_; ++t) {
        if (t != s && row[t]) acc += u[pair_index(s, t, p_)];
      }
      block[i] = acc;
    }
  }
}

void StructuredDesign::rmatvec(std::span<const double> v, std::span<double> out) const {
  const std::size_t m = pair_count(p_);
  if (v.size() != rows() || out.size() != cols()) {
    throw DimensionError("rmatvec dimension mismatch");
  }
  ++n_rmatvec_;
  // gram[s][t] = sum_{n in ones(t)} v_{block s, n}
  std::vector<double> gram(p_ * p_, 0.0);
  for (std::size_t s = 0; s < p_; ++s) {
    const double* block = v.data() + s * n_;
    for (std::size_t t = 0; t < p_; ++t) {
      if (t == s) continue;
      double acc = 0.0;
      for (const std::uint32_t i : ones_[t]) acc += block[i];
      gram[s * p_ + t] = acc;
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    const auto [s, t] = pair_from_index(j);
    out[j] = gram[s * p_ + t] + gram[t * p_ + s];
  }
  for (std::size_t s = 0; s < p_; ++s) {
    const double* block = v.data() + s * n_;
    double acc = 0.0;
    for (std::size_t i = 0; i < n_; ++i) acc += block[i];
    out[m + s] = acc;
  }
}

double StructuredDesign::column_dot(std::size_t j, std::span<const double> v) const {
  const std::size_t m = pair_count(p_);
  if (j >= cols()) throw DimensionError("column index out of range");
  if (v.size() != rows()) throw DimensionError("column_dot dimension mismatch");
  double acc = 0.0;
  if (j < m) {
    const auto [s, t] = pair_from_index(j);
    const double* block_s = v.data() + s * n_;
    const double* block_t = v.data() + t * n_;
    for (const std::uint32_t i : ones_[t]) acc += block_s[i];
    for (const std::uint32_t i : ones_[s]) acc += block_t[i];
  } else {
    const double* block = v.data() + (j - m) * n_;
    for (std::size_t i = 0; i < n_; ++i) acc += block[i];
  }
  return acc;
}

double StructuredDesign::column_dot2(std::size_t j, std::span<const double> a,
                                     std::span<const double> b) const {
  const std::size_t m = pair_count(p_);
  if (j >= cols()) throw DimensionError("column index out of range");
  double acc = 0.0;
  if (j < m) {
    const auto [s, t] = pair_from_index(j);
    const std::size_t off_s = s * n_;
    const std::size_t off_t = t * n_;
    for (const std::uint32_t i : ones_[t]) acc += a[off_s + i] * b[off_s + i];
    for (const std::uint32_t i : ones_[s]) acc += a[off_t + i] * b[off_t + i];
  } else {
    const std::size_t off = (j - m) * n_;
    for (std::size_t i = 0; i < n_; ++i) acc += a[off + i] * b[off + i];
  }
  return acc;
}

double StructuredDesign::column_weighted_sq_norm(std::size_t j,
                                                 std::span<const double> w) const {
  // Entries are 0/1, so the weighted squared norm is the weighted count.
  return column_dot(j, w);
}

void StructuredDesign::column_axpy(std::size_t j, double alpha,
                                   std::span<double> v) const {
  const std::size_t m = pair_count(p_);
  if (j >= cols()) throw DimensionError("column index out of range");
  if (j < m) {
    const auto [s, t] = pair_from_index(j);
    double* block_s = v.data() + s * n_;
    double* block_t = v.data() + t * n_;
    for (const std::uint32_t i : ones_[t]) block_s[i] += alpha;
    for (const std::uint32_t i : ones_[s]) block_t[i] += alpha;
  } else {
    double* block = v.data() + (j - m) * n_;
    for (std::size_t i = 0; i < n_; ++i) block[i] += alpha;
  }
}

double StructuredDesign::column_sq_norm(std::size_t j) const {
  const std::size_t m = pair_count(p_);
  if (j >= cols()) throw DimensionError("column index out of range");
  if (j < m) {
    const auto [s, t] = pair_from_index(j);
    return static_cast<double>(ones_[t].size() + ones_[s].size());
  }
  return static_cast<double>(n_);
}

StackedProblem build_stacked(const SampleMatrix& x) {
  if (x.p() < 2) throw DimensionError("build_stacked requires p >= 2");
  const std::size_t n = x.n();
  const std::size_t p = x.p();
  const std::size_t m = pair_count(p);

  StackedProblem sp{StructuredDesign(x), {}, {}, n * p, m + p, n, p};
  sp.response.resize(n * p);
  for (std::size_t s = 0; s < p; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      sp.response[s * n + i] = static_cast<double>(x(i, s));
    }
  }
  sp.penalty_factors.assign(m + p, 1.0);
  for (std::size_t s = 0; s < p; ++s) sp.penalty_factors[m + s] = 0.0;
  return sp;
}

ObjectiveValue converted_objective(const StackedProblem& sp, const ThetaVector& tv,
                                   double lambda, std::size_t n_samples) {
  if (tv.p != sp.vertex_count || tv.values.size() != sp.n_features) {
    throw DimensionError("ThetaVector does not match stacked problem");
  }
  if (n_samples != sp.sample_count) {
    throw DimensionError("sample count does not match stacked problem");
  }
  if (lambda < 0.0) throw ValidationError("lambda must be >= 0");

  std::vector<double> eta(sp.n_obs);
  sp.design.matvec(tv.values, eta);
  double loglik = 0.0;
  for (std::size_t k = 0; k < sp.n_obs; ++k) {
    if (sp.response[k] != 0.0) loglik += eta[k];
    loglik -= softplus(eta[k]);
  }
  double penalty = 0.0;
  for (std::size_t j = 0; j < sp.n_features; ++j) {
    if (sp.penalty_factors[j] != 0.0) {
      penalty += sp.penalty_factors[j] * std::abs(tv.values[j]);
    }
  }
  penalty *= static_cast<double>(n_samples) * lambda;
  return make_objective(loglik, penalty);
}

void write_design_coordinates(std::ostream& os, const StackedProblem& sp,
                              std::size_t max_dense_size) {
  const std::size_t dense = sp.n_obs * sp.n_features;
  if (dense > max_dense_size) {
    throw ValidationError("design too large to materialize for export");
  }
  const std::size_t n = sp.sample_count;
  const std::size_t p = sp.vertex_count;
  const std::size_t m = pair_count(p);
  const SampleMatrix& x = sp.design.samples();
  for (std::size_t s = 0; s < p; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t row = s * n + i;  // 0-based; printed 1-based
      for (std::size_t t = 0; t < p; ++t) {
        if (t != s && x(i, t)) {
          os << row + 1 << ' ' << pair_index(s, t, p) + 1 << " 1\n";
        }
      }
      os << row + 1 << ' ' << m + s + 1 << " 1\n";
    }
  }
}

}  // namespace bpmn
