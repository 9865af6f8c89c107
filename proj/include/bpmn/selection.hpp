#pragma once

#include <cstdint>
#include <vector>

#include "bpmn/estimators.hpp"
#include "bpmn/types.hpp"

namespace bpmn {

// Stability-based lambda selection over subsampled refits: pick the
// smallest lambda whose monotonized edge instability stays below beta.

struct StarsConfig {
  std::size_t n_subsamples = 20;
  std::size_t subsample_size = 0;  // 0 -> floor(10 sqrt(N))
  double beta = 0.05;
  std::vector<double> lambda_grid;  // estimator scale, strictly decreasing
  std::uint64_t seed = 0;
  Method estimator = Method::plg;  // plg or nlr
  Symmetrize symmetrize = Symmetrize::mean;
  SolverConfig solver;
  int threads = 1;
};

struct StarsResult {
  double selected_lambda = 0.0;
  // the solver-facing penalty level of the selection (lambda/p for the
  // stacked estimator, lambda itself for node-wise); reported alongside
  // because selected penalty levels are usually quoted on this scale
  double selected_lambda_internal = 0.0;
  std::size_t selected_index = 0;
  std::vector<double> lambdas;
  std::vector<double> instability;           // D(lambda), in [0, 0.5]
  std::vector<double> instability_monotone;  // sup over sparser models
  std::vector<double> mean_edge_count;       // across subsample fits
};

// Edge instability 2 phi (1 - phi) for selection frequency phi.
inline double edge_instability(double phi) { return 2.0 * phi * (1.0 - phi); }

StarsResult stars_select(const SampleMatrix& x, const StarsConfig& cfg);

// The node-wise lambda matching a stacked-scale lambda.
inline double half_lambda_translate(double lambda_stacked) {
  return 0.5 * lambda_stacked;
}

}  // namespace bpmn
