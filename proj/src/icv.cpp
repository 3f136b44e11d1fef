#include "mipboost/icv.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "mipboost/forward_selection.hpp"
#include "mipboost/least_squares.hpp"

namespace mipboost {

namespace {

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X,
                          const std::vector<int>& rows) {
  Eigen::MatrixXd out(rows.size(), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = X.row(rows[i]);
  return out;
}

Eigen::VectorXd take_rows(const Eigen::VectorXd& y,
                          const std::vector<int>& rows) {
  Eigen::VectorXd out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = y[rows[i]];
  return out;
}

double sd(const std::vector<double>& values) {
  const int m = static_cast<int>(values.size());
  if (m < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= m;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (m - 1));
}

}  // namespace

IcvFoldProblem make_fold_problem(const FoldAssignment& folds, int fold_index) {
  if (fold_index < 1 || fold_index > folds.v) {
    throw std::invalid_argument("fold index out of range");
  }
  IcvFoldProblem fp;
  fp.fold_index = fold_index;
  fp.withheld_rows = folds.rows_in_fold(fold_index);
  fp.training_rows = folds.rows_not_in_fold(fold_index);
  return fp;
}

std::pair<Solution, double> solve_fold(
    const MiqpProblem& problem, const IcvFoldProblem& fold, int k,
    const IcvOptions& options,
    const std::optional<Eigen::VectorXd>& carry_warm_start) {
  const int n_train = static_cast<int>(fold.training_rows.size());
  const int p = static_cast<int>(problem.X.cols());
  if (n_train < k + 1) {
    throw std::invalid_argument("fold too small: " + std::to_string(n_train) +
                                " training rows for k = " + std::to_string(k));
  }

  MiqpProblem sub;
  sub.X = take_rows(problem.X, fold.training_rows);
  sub.y = take_rows(problem.y, fold.training_rows);
  sub.k = k;
  sub.big_m = problem.big_m;

  MiqpOptions solver = options.solver;

  const int fs_cap = static_cast<int>(std::min<long>(p, n_train - 1));
  const bool want_surrogate = options.use_surrogate && k + 1 <= fs_cap;
  const bool want_fs_start =
      options.fs_warm_starts && !carry_warm_start && k >= 1 && k <= fs_cap;
  if (want_surrogate || want_fs_start) {
    const int kmax = std::min(fs_cap, want_surrogate ? k + 1 : k);
    const FsPath path = fs_path(sub.X, sub.y, kmax);
    if (want_surrogate && k + 1 <= path.kmax()) {
      solver.surrogate_bound = fs_surrogate_bound(path, k, n_train);
    }
    if (want_fs_start) {
      solver.warm_start = fs_warm_start(path, std::min(k, path.kmax())).second;
    }
  }
  if (carry_warm_start) {
    std::vector<int> support;
    for (int j = 0; j < p; ++j) {
      if ((*carry_warm_start)[j] != 0.0) support.push_back(j);
    }
    solver.warm_start = least_squares_on_support(sub.X, sub.y, support);
  }

  Solution sol = solve(sub, solver);

  Eigen::VectorXd beta = sol.beta;
  if (options.refit_fold_predictions) {
    std::vector<int> support;
    for (int j = 0; j < p; ++j) {
      if (sol.z[j] != 0) support.push_back(j);
    }
    beta = least_squares_on_support(sub.X, sub.y, support);
  }
  const Eigen::MatrixXd Xw = take_rows(problem.X, fold.withheld_rows);
  const Eigen::VectorXd yw = take_rows(problem.y, fold.withheld_rows);
  const double mse = (yw - Xw * beta).squaredNorm() / yw.size();
  return {std::move(sol), mse};
}

IcvEvaluator::IcvEvaluator(Dataset dataset, FoldAssignment folds,
                           IcvOptions options)
    : dataset_(std::move(dataset)),
      folds_(std::move(folds)),
      options_(std::move(options)) {
  big_m_ = big_m_bounds(dataset_.X, dataset_.y, options_.big_m_scale);
}

const CvResult& IcvEvaluator::evaluate(int k) {
  auto it = memo_.find(k);
  if (it != memo_.end()) return it->second;

  if (k < 0) throw std::invalid_argument("sparsity bound must be nonnegative");
  const auto t0 = std::chrono::steady_clock::now();
  CvResult result;
  result.k = k;
  const int v = folds_.v;
  result.fold_mse.resize(v);
  result.fold_supports.resize(v);
  result.fold_status.resize(v);

  if (k == 0) {
    for (int f = 1; f <= v; ++f) {
      const auto rows = folds_.rows_in_fold(f);
      const Eigen::VectorXd yw = take_rows(dataset_.y, rows);
      result.fold_mse[f - 1] = yw.squaredNorm() / yw.size();
      result.fold_status[f - 1] = SolveStatus::optimal;
    }
  } else {
    MiqpProblem full{dataset_.X, dataset_.y, k, big_m_};
    auto run_fold = [&](int f, const std::optional<Eigen::VectorXd>& carry) {
      const IcvFoldProblem fp = make_fold_problem(folds_, f);
      auto [sol, mse] = solve_fold(full, fp, k, options_, carry);
      result.fold_mse[f - 1] = mse;
      result.fold_status[f - 1] = sol.status;
      std::vector<int> support;
      for (int j = 0; j < dataset_.p(); ++j) {
        if (sol.z[j] != 0) support.push_back(j);
      }
      result.fold_supports[f - 1] = std::move(support);
      return sol;
    };

    if (options_.parallel_folds) {
      std::vector<std::thread> pool;
      pool.reserve(v);
      for (int f = 1; f <= v; ++f) {
        pool.emplace_back([&, f]() { run_fold(f, std::nullopt); });
      }
      for (auto& t : pool) t.join();
    } else {
      std::optional<Eigen::VectorXd> carry;
      for (int f = 1; f <= v; ++f) {
        Solution sol = run_fold(f, carry);
        if (options_.chain_warm_starts) carry = sol.beta;
      }
    }
    solver_calls_ += v;
  }

  result.cvmse = 0.0;
  for (double m : result.fold_mse) result.cvmse += m;
  result.cvmse /= v;
  result.fold_sd = sd(result.fold_mse);
  result.total_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return memo_.emplace(k, std::move(result)).first->second;
}

CvResult cv_error_at_k(const Dataset& dataset, const FoldAssignment& folds,
                       int k, const IcvOptions& options) {
  IcvEvaluator evaluator(dataset, folds, options);
  return evaluator.evaluate(k);
}

void export_cv_results(const std::vector<CvResult>& results,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "k,cvmse,fold_sd,total_time,fold_status\n";
  for (const auto& r : results) {
    out << r.k << ',' << r.cvmse << ',' << r.fold_sd << ',' << r.total_time
        << ',';
    for (std::size_t i = 0; i < r.fold_status.size(); ++i) {
      if (i) out << ';';
      out << to_string(r.fold_status[i]);
    }
    out << '\n';
  }
}

}  // namespace mipboost
