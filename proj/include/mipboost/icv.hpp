#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mipboost/data_model.hpp"
#include "mipboost/miqp.hpp"

namespace mipboost {

/// Cross-validated error of the sparsity bound k with per-fold detail.
struct CvResult {
  int k = 0;
  double cvmse = 0.0;
  std::vector<double> fold_mse;
  std::vector<std::vector<int>> fold_supports;
  double fold_sd = 0.0;
  double total_time = 0.0;
  std::vector<SolveStatus> fold_status;
};

/// One fold of the integrated scheme: the withheld rows drop out of the
/// objective (the large-relaxation limit), leaving the training-row problem.
struct IcvFoldProblem {
  int fold_index = 0;
  std::vector<int> withheld_rows;
  std::vector<int> training_rows;
};

struct IcvOptions {
  MiqpOptions solver;
  double big_m_scale = 5.0;
  bool fs_warm_starts = true;     // seed each fold from forward selection
  bool chain_warm_starts = true;  // carry fold solutions to the next fold
  bool use_surrogate = true;      // forward-selection surrogate bound per fold
  bool refit_fold_predictions = false;  // predict from an OLS refit instead
                                        // of the solver coefficients
  bool parallel_folds = false;    // drops chaining, runs folds concurrently
};

IcvFoldProblem make_fold_problem(const FoldAssignment& folds, int fold_index);

/// Solves one fold: the training-row instance with the full-data big-M,
/// warm-started from the carried support (refit on this fold) when present,
/// else from forward selection. Returns the solution and the withheld MSE.
std::pair<Solution, double> solve_fold(
    const MiqpProblem& problem, const IcvFoldProblem& fold, int k,
    const IcvOptions& options,
    const std::optional<Eigen::VectorXd>& carry_warm_start = std::nullopt);

/// Evaluates f(k) across all folds with warm-start chaining, memoized by k.
class IcvEvaluator {
 public:
  IcvEvaluator(Dataset dataset, FoldAssignment folds, IcvOptions options);

  const CvResult& evaluate(int k);
  bool is_memoized(int k) const { return memo_.count(k) > 0; }
  long solver_calls() const { return solver_calls_; }
  const Dataset& dataset() const { return dataset_; }
  const Eigen::VectorXd& big_m() const { return big_m_; }
  const std::map<int, CvResult>& results() const { return memo_; }

 private:
  Dataset dataset_;
  FoldAssignment folds_;
  IcvOptions options_;
  Eigen::VectorXd big_m_;
  std::map<int, CvResult> memo_;
  long solver_calls_ = 0;
};

/// One-shot evaluation without an evaluator instance.
CvResult cv_error_at_k(const Dataset& dataset, const FoldAssignment& folds,
                       int k, const IcvOptions& options);

/// CSV rows: k, cvmse, fold_sd, total_time, per-fold status codes.
void export_cv_results(const std::vector<CvResult>& results,
                       const std::string& path);

}  // namespace mipboost
