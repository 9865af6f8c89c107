#include "bpmn/sampling.hpp"

#include "bpmn/math.hpp"
#include "bpmn/rng.hpp"

namespace bpmn {

ThetaMatrix generate_graph(const GraphSpec& spec) {
  if (spec.p == 0) throw DimensionError("GraphSpec requires p >= 1");
  if (!(spec.edge_prob > 0.0 && spec.edge_prob < 1.0)) {
    throw ValidationError("edge_prob must be in (0,1)");
  }
  Rng rng(spec.seed);
  ThetaMatrix theta(spec.p);
  for (std::size_t t = 1; t < spec.p; ++t) {
    for (std::size_t s = 0; s < t; ++s) {
      if (rng.bernoulli(spec.edge_prob)) theta.set(s, t, rng.uniform(-1.0, 1.0));
    }
  }
  for (const auto& [vertex, value] : spec.diagonal_override) {
    if (vertex >= spec.p) throw DimensionError("diagonal override vertex out of range");
    theta.set(vertex, vertex, value);
  }
  return theta;
}

double conditional_prob(const ThetaMatrix& theta, std::span<const std::uint8_t> x,
                        std::size_t s) {
  const std::size_t p = theta.p();
  if (x.size() != p) throw DimensionError("state vector length does not match p");
  if (s >= p) throw DimensionError("vertex index out of range");
  double eta = theta(s, s);
  for (std::size_t t = 0; t < p; ++t) {
    if (t != s && x[t]) eta += theta(s, t);
  }
  return logistic(eta);
}

SampleMatrix gibbs_sample(const ThetaMatrix& theta, const GibbsConfig& cfg) {
  if (cfg.n_samples == 0) throw ValidationError("n_samples must be >= 1");
  if (cfg.thinning == 0) throw ValidationError("thinning must be >= 1");
  const std::size_t p = theta.p();
  Rng rng(cfg.seed);

  std::vector<std::uint8_t> state(p);
  for (std::size_t s = 0; s < p; ++s) state[s] = rng.bernoulli(0.5) ? 1 : 0;

  auto sweep = [&] {
    for (std::size_t s = 0; s < p; ++s) {
      state[s] = rng.next_double() < conditional_prob(theta, state, s) ? 1 : 0;
    }
  };

  for (std::size_t b = 0; b < cfg.burn_in; ++b) sweep();

  std::vector<std::uint8_t> samples;
  samples.reserve(cfg.n_samples * p);
  for (std::size_t k = 0; k < cfg.n_samples; ++k) {
    for (std::size_t r = 0; r < cfg.thinning; ++r) sweep();
    samples.insert(samples.end(), state.begin(), state.end());
  }
  return SampleMatrix(cfg.n_samples, p, std::move(samples));
}

}  // namespace bpmn
