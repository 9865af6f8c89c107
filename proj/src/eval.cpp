#include "bpmn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bpmn/transform.hpp"

namespace bpmn {

RocCurve roc_curve(const ThetaMatrix& truth, const ThetaMatrix& scores) {
  if (truth.p() != scores.p()) throw DimensionError("roc_curve requires equal p");
  const std::size_t p = truth.p();
  const std::size_t m = pair_count(p);

  struct Scored {
    double score;
    bool positive;
  };
  std::vector<Scored> items;
  items.reserve(m);
  std::size_t n_pos = 0;
  for (std::size_t s = 0; s < p; ++s) {
    for (std::size_t t = s + 1; t < p; ++t) {
      const bool positive = truth(s, t) != 0.0;
      n_pos += positive;
      items.push_back({std::abs(scores(s, t)), positive});
    }
  }
  if (n_pos == 0 || n_pos == m) {
    throw DegenerateInputError("truth edge set is empty or complete");
  }
  const std::size_t n_neg = m - n_pos;

  std::sort(items.begin(), items.end(),
            [](const Scored& a, const Scored& b) { return a.score > b.score; });

  RocCurve curve;
  curve.fpr.push_back(0.0);
  curve.tpr.push_back(0.0);
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < items.size()) {
    const double score = items[i].score;
    // One step per distinct score: the whole tie group enters together.
    while (i < items.size() && items[i].score == score) {
      tp += items[i].positive;
      fp += !items[i].positive;
      ++i;
    }
    curve.fpr.push_back(static_cast<double>(fp) / static_cast<double>(n_neg));
    curve.tpr.push_back(static_cast<double>(tp) / static_cast<double>(n_pos));
    curve.thresholds.push_back(score);
  }
  double auc = 0.0;
  for (std::size_t k = 1; k < curve.fpr.size(); ++k) {
    auc += (curve.fpr[k] - curve.fpr[k - 1]) * (curve.tpr[k] + curve.tpr[k - 1]) / 2.0;
  }
  curve.auc = auc;
  return curve;
}

ThetaMatrix path_entry_scores(const FitReport& report) {
  if (report.estimates.empty()) {
    throw ValidationError("path_entry_scores needs a nonempty report");
  }
  const std::size_t p = report.estimates.front().p();
  ThetaMatrix entry(p);
  for (std::size_t i = 0; i < report.estimates.size(); ++i) {
    const double lam = report.lambdas[i].lambda;
    for (std::size_t s = 0; s < p; ++s) {
      for (std::size_t t = s + 1; t < p; ++t) {
        if (report.estimates[i](s, t) != 0.0 && entry(s, t) == 0.0) {
          entry.set(s, t, lam);
        }
      }
    }
  }
  return entry;
}

std::vector<BenchRecord> bench_fit(Method method, const SampleMatrix& x,
                                   const std::vector<double>& lambdas,
                                   const SolverConfig& solver_cfg,
                                   const DirectConfig& direct_cfg, int repeats,
                                   const BenchMeta& meta) {
  if (repeats < 3) throw ValidationError("bench requires repeats >= 3");

  auto run = [&]() -> FitReport {
    switch (method) {
      case Method::plg:
        return fit_plg(x, lambdas, solver_cfg);
      case Method::nlr:
        return fit_nlr(x, lambdas, solver_cfg, Symmetrize::mean, 1);
      case Method::direct_pl:
        return fit_direct_pl(x, lambdas, direct_cfg);
    }
    throw ValidationError("unknown method");
  };

  (void)run();  // warm-up, discarded

  std::vector<BenchRecord> records;
  records.reserve(lambdas.size() * static_cast<std::size_t>(repeats));
  for (int rep = 0; rep < repeats; ++rep) {
    const FitReport report = run();
    for (std::size_t i = 0; i < report.lambdas.size(); ++i) {
      BenchRecord rec;
      rec.method = method;
      rec.p = x.p();
      rec.edge_prob = meta.edge_prob;
      rec.lambda = report.lambdas[i].lambda;
      rec.trial_seed = meta.trial_seed;
      rec.repeat = rep;
      rec.wall_time_ns = report.wall_time_ns[i];
      rec.converged = report.converged[i];
      rec.iterations = report.sweeps[i];
      records.push_back(rec);
    }
  }
  return records;
}

double median(std::vector<double> values) {
  if (values.empty()) throw ValidationError("median of empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace bpmn
