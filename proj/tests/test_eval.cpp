#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bpmn/estimators.hpp"
#include "bpmn/eval.hpp"
#include "bpmn/rng.hpp"
#include "bpmn/sampling.hpp"
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
  gcfg.burn_in = 300;
  gcfg.seed = seed + 1;
  return gibbs_sample(generate_graph(spec), gcfg);
}

ThetaMatrix random_truth(std::size_t p, std::uint64_t seed, double edge_prob) {
  GraphSpec spec;
  spec.p = p;
  spec.edge_prob = edge_prob;
  spec.seed = seed;
  return generate_graph(spec);
}

}  // namespace

TEST_CASE("perfect scores give auc one") {
  const ThetaMatrix truth = random_truth(8, 3, 0.4);
  const RocCurve curve = roc_curve(truth, truth);
  CHECK(curve.auc == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(curve.fpr.front() == 0.0);
  CHECK(curve.tpr.front() == 0.0);
  CHECK(curve.fpr.back() == 1.0);
  CHECK(curve.tpr.back() == 1.0);
  for (std::size_t i = 1; i < curve.fpr.size(); ++i) {
    CHECK(curve.fpr[i] >= curve.fpr[i - 1]);
    CHECK(curve.tpr[i] >= curve.tpr[i - 1]);
  }
}

TEST_CASE("constant scores collapse to the diagonal") {
  const ThetaMatrix truth = random_truth(7, 5, 0.3);
  ThetaMatrix flat(7);
  for (std::size_t s = 0; s < 7; ++s) {
    for (std::size_t t = s + 1; t < 7; ++t) flat.set(s, t, 0.25);
  }
  const RocCurve curve = roc_curve(truth, flat);
  REQUIRE(curve.fpr.size() == 2);  // (0,0) then the single tie group at (1,1)
  CHECK(curve.auc == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("random scores hover near one half") {
  const ThetaMatrix truth = random_truth(20, 7, 0.3);
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(900 + seed);
    ThetaMatrix scores(20);
    for (std::size_t s = 0; s < 20; ++s) {
      for (std::size_t t = s + 1; t < 20; ++t) {
        scores.set(s, t, rng.uniform(-1.0, 1.0));
      }
    }
    total += roc_curve(truth, scores).auc;
  }
  CHECK(std::abs(total / 50.0 - 0.5) < 0.1);
}

TEST_CASE("auc is invariant under monotone score transforms") {
  const ThetaMatrix truth = random_truth(10, 11, 0.3);
  Rng rng(13);
  ThetaMatrix scores(10);
  for (std::size_t s = 0; s < 10; ++s) {
    for (std::size_t t = s + 1; t < 10; ++t) {
      scores.set(s, t, rng.uniform(-2.0, 2.0));
    }
  }
  ThetaMatrix warped(10);
  for (std::size_t s = 0; s < 10; ++s) {
    for (std::size_t t = s + 1; t < 10; ++t) {
      const double a = std::abs(scores(s, t));
      warped.set(s, t, std::log1p(3.0 * a) + 0.1 * a * a);  // strictly monotone in |.|
    }
  }
  CHECK(roc_curve(truth, scores).auc ==
        doctest::Approx(roc_curve(truth, warped).auc).epsilon(1e-12));
}

TEST_CASE("small perturbations keep tpr one at the right threshold") {
  const ThetaMatrix truth = random_truth(9, 17, 0.4);
  double min_edge = 1e9;
  for (std::size_t s = 0; s < 9; ++s) {
    for (std::size_t t = s + 1; t < 9; ++t) {
      if (truth(s, t) != 0.0) min_edge = std::min(min_edge, std::abs(truth(s, t)));
    }
  }
  const double noise = 0.25 * min_edge;
  Rng rng(19);
  ThetaMatrix scores = truth;
  for (std::size_t s = 0; s < 9; ++s) {
    for (std::size_t t = s + 1; t < 9; ++t) {
      scores.set(s, t, truth(s, t) + rng.uniform(-noise, noise));
    }
  }
  const RocCurve curve = roc_curve(truth, scores);
  // at the cutoff min_edge - noise every true edge is recovered
  for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
    if (curve.thresholds[i] <= min_edge - noise) {
      CHECK(curve.tpr[i] == doctest::Approx(1.0));
      break;
    }
  }
}

TEST_CASE("degenerate truth is rejected") {
  const ThetaMatrix empty(5);
  ThetaMatrix full(5);
  for (std::size_t s = 0; s < 5; ++s) {
    for (std::size_t t = s + 1; t < 5; ++t) full.set(s, t, 1.0);
  }
  ThetaMatrix scores(5);
  CHECK_THROWS_AS(roc_curve(empty, scores), DegenerateInputError);
  CHECK_THROWS_AS(roc_curve(full, scores), DegenerateInputError);
}

TEST_CASE("path entry scores rank early edges higher") {
  const SampleMatrix x = gibbs_instance(8, 0.3, 500, 23);
  const std::vector<double> lambdas = auto_lambda_grid(0.5, 12, 0.02);
  const FitReport report = fit_plg(x, lambdas, SolverConfig{});
  const ThetaMatrix entry = path_entry_scores(report);
  // every edge present at some lambda carries its first-entry lambda
  for (std::size_t i = 0; i < report.estimates.size(); ++i) {
    for (std::size_t s = 0; s < 8; ++s) {
      for (std::size_t t = s + 1; t < 8; ++t) {
        if (report.estimates[i](s, t) != 0.0) {
          CHECK(entry(s, t) >= report.lambdas[i].lambda);
        }
      }
    }
  }
}

TEST_CASE("bench rejects too few repeats") {
  const SampleMatrix x = gibbs_instance(4, 0.4, 100, 29);
  CHECK_THROWS_AS(bench_fit(Method::plg, x, {0.1}, SolverConfig{}, DirectConfig{},
                            1, BenchMeta{}),
                  ValidationError);
}

TEST_CASE("bench iteration counts are reproducible; times vary") {
  const SampleMatrix x = gibbs_instance(6, 0.3, 300, 31);
  const std::vector<double> lambdas{0.2, 0.1, 0.05};
  const BenchMeta meta{0.3, 31};
  const auto records =
      bench_fit(Method::plg, x, lambdas, SolverConfig{}, DirectConfig{}, 4, meta);
  REQUIRE(records.size() == 12);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t rep = 1; rep < 4; ++rep) {
      CHECK(records[rep * 3 + i].iterations == records[i].iterations);
      CHECK(records[rep * 3 + i].converged == records[i].converged);
      CHECK(records[rep * 3 + i].lambda == records[i].lambda);
    }
  }
  for (const auto& r : records) CHECK(r.wall_time_ns > 0);
}

TEST_CASE("bench covers all three methods") {
  const SampleMatrix x = gibbs_instance(5, 0.3, 150, 37);
  const std::vector<double> lambdas{0.1, 0.04};
  for (const Method m : {Method::plg, Method::nlr, Method::direct_pl}) {
    const auto records =
        bench_fit(m, x, lambdas, SolverConfig{}, DirectConfig{}, 3, BenchMeta{});
    CHECK(records.size() == 6);
    for (const auto& r : records) CHECK(r.method == m);
  }
}

TEST_CASE("median helper") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK_THROWS_AS(median({}), ValidationError);
}

TEST_CASE("stacked fit time grows with the vertex count") {
  // qualitative trend only; asserted at the extremes, series logged
  std::vector<double> totals;
  for (const std::size_t p : {5u, 10u, 15u, 20u, 25u}) {
    GraphSpec spec;
    spec.p = p;
    spec.edge_prob = 0.3;
    spec.seed = 500 + p;
    GibbsConfig gcfg;
    gcfg.n_samples = 1000;
    gcfg.burn_in = 300;
    gcfg.seed = 600 + p;
    const SampleMatrix x = gibbs_sample(generate_graph(spec), gcfg);
    const std::vector<double> lambdas{0.1, 0.05, 0.02};
    const auto records =
        bench_fit(Method::plg, x, lambdas, SolverConfig{}, DirectConfig{}, 3,
                  BenchMeta{0.3, 500 + p});
    std::vector<double> per_repeat(3, 0.0);
    for (const auto& r : records) {
      per_repeat[static_cast<std::size_t>(r.repeat)] +=
          static_cast<double>(r.wall_time_ns);
    }
    totals.push_back(median(per_repeat));
    MESSAGE("p=", p, " median path time ", totals.back() / 1e6, " ms");
  }
  CHECK(totals.back() > totals.front());
}
