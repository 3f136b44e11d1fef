#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mipboost/data_model.hpp"
#include "mipboost/icv.hpp"

namespace mipboost {

struct BfOptions {
  double delta = 0.01;    // improvement threshold
  int feeler_radius = 1;  // probe distance around the tentative estimate
  int itermax = 0;        // evaluation cap; 0 = 3 ceil(log2 c0) + 10
  int max_restarts = 1;
  int a0 = 1;
  int c0 = 0;  // required; typically from initial_upper_bound
};

struct BfDecision {
  int a = 0, b = 0, c = 0;
  double df_ab = 0.0, df_bc = 0.0;
  std::string action;  // overfit_guard_left | left | right | converged |
                       // feeler_grow_restart | feeler_sparse_restart |
                       // accept | itermax
};

struct BfTrace {
  std::map<int, CvResult> evaluated;
  std::vector<BfDecision> decisions;
  std::vector<int> failed;  // ks whose evaluation threw; treated as +inf
  int restarts = 0;
  int k_hat = 0;
  int evaluations = 0;
};

using CvEvaluatorFn = std::function<CvResult(int)>;

/// Standardized marginal change of the cross-validation curve between x and
/// y: -(1/f(x)) (f(y)-f(x))/(y-x), the percentage improvement per feature
/// added. Positive when the curve decreases. A nonpositive f(x) is guarded
/// by a 1e-12 denominator and reported through `guarded`.
double delta_f(double f_x, double f_y, double x, double y,
               bool* guarded = nullptr);

/// Upper search endpoint from an inexpensive run of the min-CV lasso:
/// its support size clipped to [2, min(p, n)], falling back to min(p, n)
/// when the support is empty.
int initial_upper_bound(const Dataset& d, const FoldAssignment& folds,
                        int n_lambda = 100, double ratio = 1e-3);

/// Bisection with feelers over the sparsity bound. Evaluations are memoized
/// across restarts; failed evaluations count as +inf. Returns the chosen k
/// and the full search trace.
std::pair<int, BfTrace> tune(const CvEvaluatorFn& evaluate,
                             const BfOptions& options);

/// CSV columns: k, cvmse, fold_sd, decision (k_hat / failed / blank).
void export_bf_trace(const BfTrace& trace, const std::string& path);

}  // namespace mipboost
