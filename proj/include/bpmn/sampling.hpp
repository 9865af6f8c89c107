#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bpmn/types.hpp"

namespace bpmn {

// Ground-truth generation and Gibbs sampling.  Everything is deterministic
// given the seeds; independent trials should use distinct seeds (or
// Rng::split streams).

struct GraphSpec {
  std::size_t p = 0;
  double edge_prob = 0.0;  // each unordered pair present independently
  // (vertex, value) pairs applied after edge generation; 0-based vertex.
  std::vector<std::pair<std::size_t, double>> diagonal_override;
  std::uint64_t seed = 0;
};

struct GibbsConfig {
  std::size_t n_samples = 1000;
  std::size_t burn_in = 1000;  // full sweeps discarded before recording
  std::size_t thinning = 1;    // sweeps between recorded samples
  std::uint64_t seed = 0;
};

// Pairs drawn in column-stacked upper-triangle order; present edges get a
// Uniform[-1,1] weight.  Diagonals are zero unless overridden.
ThetaMatrix generate_graph(const GraphSpec& spec);

// P(x_s = 1 | x_{-s}) = logistic(theta_ss + sum_{t != s} theta_st x_t).
double conditional_prob(const ThetaMatrix& theta, std::span<const std::uint8_t> x,
                        std::size_t s);

// Systematic-scan Gibbs sampler: uniform random start, vertices updated in
// ascending order each sweep.
SampleMatrix gibbs_sample(const ThetaMatrix& theta, const GibbsConfig& cfg);

}  // namespace bpmn
