#pragma once

#include <cstdint>
#include <vector>

#include "bpmn/estimators.hpp"
#include "bpmn/types.hpp"

namespace bpmn {

// Structure-recovery scoring and the timing harness.

struct RocCurve {
  std::vector<double> fpr;         // non-decreasing, starts 0, ends 1
  std::vector<double> tpr;         // non-decreasing, starts 0, ends 1
  std::vector<double> thresholds;  // score cutoff per point (+inf first)
  double auc = 0.0;
};

// Edge scores are |scores_st|; truth edges are the nonzero off-diagonals of
// `truth`.  Tied scores collapse into one threshold step; AUC is
// trapezoidal.  Throws DegenerateInputError when truth has zero or all
// possible edges.
RocCurve roc_curve(const ThetaMatrix& truth, const ThetaMatrix& scores);

// Path-based edge scores: each edge scored by the largest lambda at which
// it is nonzero in the report's path (0 when it never enters).
ThetaMatrix path_entry_scores(const FitReport& report);

struct BenchRecord {
  Method method = Method::plg;
  std::size_t p = 0;
  double edge_prob = 0.0;
  double lambda = 0.0;
  std::uint64_t trial_seed = 0;
  int repeat = 0;
  std::int64_t wall_time_ns = 0;
  bool converged = false;
  std::uint64_t iterations = 0;  // coordinate sweeps (proximal steps for direct)
};

struct BenchMeta {
  double edge_prob = 0.0;
  std::uint64_t trial_seed = 0;
};

// Times the learning process per lambda within the method's warm-started
// path (one discarded warm-up run first).  Timing includes the stacked
// design construction for the stacked method and excludes data generation,
// scoring, and I/O.  Iteration counts must be identical across repeats.
std::vector<BenchRecord> bench_fit(Method method, const SampleMatrix& x,
                                   const std::vector<double>& lambdas,
                                   const SolverConfig& solver_cfg,
                                   const DirectConfig& direct_cfg, int repeats,
                                   const BenchMeta& meta);

double median(std::vector<double> values);

}  // namespace bpmn
