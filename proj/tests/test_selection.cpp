#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bpmn/rng.hpp"
#include "bpmn/sampling.hpp"
#include "bpmn/selection.hpp"
#include "bpmn/solver.hpp"
#include "bpmn/transform.hpp"
#include "oracles.hpp"

using namespace bpmn;

namespace {

SampleMatrix gibbs_instance(std::size_t p, double edge_prob, std::size_t n,
                            std::uint64_t seed) {
  GraphSpec spec;
  spec.p = p;
  spec.edge_prob = edge_prob;
  spec.seed = seed;
  GibbsConfig gcfg;
  gcfg.n_samples = n;
  gcfg.burn_in = 500;
  gcfg.seed = seed + 1;
  return gibbs_sample(generate_graph(spec), gcfg);
}

}  // namespace

TEST_CASE("edge instability formula") {
  CHECK(edge_instability(0.0) == 0.0);
  CHECK(edge_instability(1.0) == 0.0);
  CHECK(edge_instability(0.5) == 0.5);  // the maximum
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const double phi = rng.next_double();
    const double xi = edge_instability(phi);
    CHECK(xi >= 0.0);
    CHECK(xi <= 0.5);
  }
}

TEST_CASE("half lambda translation") {
  CHECK(half_lambda_translate(0.01566) == doctest::Approx(0.00783).epsilon(1e-12));
  CHECK(half_lambda_translate(0.0144) == doctest::Approx(0.0072).epsilon(1e-12));
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const double lam = rng.uniform(1e-4, 1.0);
    CHECK(half_lambda_translate(lam) == 0.5 * lam);
  }
}

TEST_CASE("identical fits per lambda select the smallest grid lambda") {
  // a grid entirely above lambda_max: every subsample fit is the empty
  // edge set, so D = 0 everywhere and the smallest lambda wins
  const SampleMatrix x = gibbs_instance(5, 0.4, 400, 7);
  const StackedProblem sp = build_stacked(x);
  const double big = 5.0 * static_cast<double>(x.p()) * lambda_max(sp);
  StarsConfig cfg;
  cfg.lambda_grid = {big, 0.8 * big, 0.64 * big};
  cfg.n_subsamples = 8;
  cfg.seed = 11;
  const StarsResult result = stars_select(x, cfg);
  for (const double d : result.instability) CHECK(d == 0.0);
  CHECK(result.selected_lambda == cfg.lambda_grid.back());
  for (const double e : result.mean_edge_count) CHECK(e == 0.0);
}

TEST_CASE("instability stays in range and the monotonized curve is monotone") {
  const SampleMatrix x = gibbs_instance(8, 0.3, 400, 13);
  StarsConfig cfg;
  cfg.lambda_grid = auto_lambda_grid(0.6, 15, 0.005);
  cfg.n_subsamples = 10;
  cfg.seed = 17;
  const StarsResult result = stars_select(x, cfg);
  for (std::size_t i = 0; i < result.lambdas.size(); ++i) {
    CHECK(result.instability[i] >= 0.0);
    CHECK(result.instability[i] <= 0.5);
    CHECK(result.instability_monotone[i] >= result.instability[i]);
    if (i > 0) {
      CHECK(result.instability_monotone[i] >= result.instability_monotone[i - 1]);
    }
  }
  CHECK(result.instability_monotone[result.selected_index] <= cfg.beta);
  // anything denser than the selection violates the threshold
  for (std::size_t i = result.selected_index + 1; i < result.lambdas.size(); ++i) {
    CHECK(result.instability_monotone[i] > cfg.beta);
  }
}

TEST_CASE("selection is deterministic given the seed") {
  const SampleMatrix x = gibbs_instance(7, 0.3, 300, 19);
  StarsConfig cfg;
  cfg.lambda_grid = auto_lambda_grid(0.5, 10, 0.01);
  cfg.n_subsamples = 6;
  cfg.seed = 23;
  const StarsResult a = stars_select(x, cfg);
  const StarsResult b = stars_select(x, cfg);
  CHECK(a.selected_lambda == b.selected_lambda);
  CHECK(a.instability == b.instability);

  cfg.seed = 24;
  const StarsResult c = stars_select(x, cfg);
  MESSAGE("seed 23 selects ", a.selected_lambda, ", seed 24 selects ",
          c.selected_lambda);
}

TEST_CASE("threads do not change the selection") {
  const SampleMatrix x = gibbs_instance(6, 0.3, 300, 29);
  StarsConfig cfg;
  cfg.lambda_grid = auto_lambda_grid(0.5, 8, 0.02);
  cfg.n_subsamples = 6;
  cfg.seed = 31;
  const StarsResult one = stars_select(x, cfg);
  cfg.threads = 3;
  const StarsResult three = stars_select(x, cfg);
  CHECK(one.selected_lambda == three.selected_lambda);
  CHECK(one.instability == three.instability);
}

TEST_CASE("nlr estimator path also works") {
  const SampleMatrix x = gibbs_instance(6, 0.3, 300, 37);
  StarsConfig cfg;
  cfg.estimator = Method::nlr;
  cfg.lambda_grid = auto_lambda_grid(0.25, 8, 0.02);
  cfg.n_subsamples = 6;
  cfg.seed = 41;
  const StarsResult result = stars_select(x, cfg);
  CHECK(result.selected_lambda > 0.0);
  for (const double d : result.instability) {
    CHECK(d >= 0.0);
    CHECK(d <= 0.5);
  }
}

TEST_CASE("infeasible grid raises") {
  // a grid confined to the unstable mid-range on a small noisy sample,
  // with an ultra-strict threshold: any single wavering edge exceeds beta
  const SampleMatrix x = gibbs_instance(8, 0.3, 60, 43);
  const StackedProblem sp = build_stacked(x);
  const double lam_max = 8.0 * lambda_max(sp);
  StarsConfig cfg;
  cfg.lambda_grid = {0.6 * lam_max, 0.4 * lam_max, 0.25 * lam_max};
  cfg.n_subsamples = 8;
  cfg.subsample_size = 40;
  cfg.beta = 0.001;
  cfg.seed = 47;
  CHECK_THROWS_AS(stars_select(x, cfg), InfeasibleError);
}

TEST_CASE("config validation") {
  const SampleMatrix x = gibbs_instance(5, 0.3, 100, 53);
  StarsConfig cfg;
  cfg.lambda_grid = {0.1, 0.05};
  cfg.subsample_size = 100;  // not < N
  CHECK_THROWS_AS(stars_select(x, cfg), ValidationError);
  cfg.subsample_size = 0;
  cfg.beta = 0.7;
  CHECK_THROWS_AS(stars_select(x, cfg), ValidationError);
  cfg.beta = 0.05;
  cfg.estimator = Method::direct_pl;
  CHECK_THROWS_AS(stars_select(x, cfg), ValidationError);
}

TEST_CASE("default subsample size is floor(10 sqrt N)") {
  // N = 300 -> floor(10 * 17.32) = 173 < 300; selection must run
  const SampleMatrix x = gibbs_instance(5, 0.4, 300, 59);
  StarsConfig cfg;
  cfg.lambda_grid = auto_lambda_grid(1.0, 6, 0.05);
  cfg.n_subsamples = 5;
  cfg.seed = 61;
  CHECK_NOTHROW(stars_select(x, cfg));
}
