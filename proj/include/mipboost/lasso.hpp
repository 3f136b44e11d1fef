#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mipboost/data_model.hpp"

namespace mipboost {

/// Solution path of min (1/(2n))||y - X b||^2 + lambda ||b||_1 over a
/// descending lambda grid. The first grid point is lambda_max, where b = 0.
struct LassoPath {
  Eigen::VectorXd lambdas;
  std::vector<Eigen::VectorXd> betas;
  std::vector<int> support_sizes;
};

/// Cross-validation curve over a lambda grid with the minimizing and
/// one-standard-deviation selection rules.
struct LassoCv {
  Eigen::VectorXd lambdas;
  Eigen::VectorXd cvmse;
  Eigen::VectorXd fold_sd;
  std::vector<int> support_sizes;  // on the full data
  int index_min = 0;
  int index_1sd = 0;
  double lambda_min = 0.0;
  double lambda_1sd = 0.0;
};

struct CdDiagnostics {
  std::vector<double> sweep_objectives;
  double kkt_residual = 0.0;
  int sweeps = 0;
};

/// Log-spaced grid from lambda_max = max_j |x_j^T y|/n down to
/// ratio * lambda_max.
Eigen::VectorXd lambda_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            int n_lambda = 100, double ratio = 1e-3);

/// Cyclic soft-threshold coordinate descent to KKT residual <= tol.
/// Throws if the sweep cap is reached before convergence.
Eigen::VectorXd coordinate_descent(const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& y, double lambda,
                                   Eigen::VectorXd warm,
                                   CdDiagnostics* diagnostics = nullptr,
                                   double tol = 1e-7, int max_sweeps = 100000);

/// Warm-started path fit over a descending grid.
LassoPath fit_lasso_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& lambdas);

/// Largest-to-smallest |x_j^T r|/n KKT certificate residual for a given fit.
double lasso_kkt_residual(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          double lambda, const Eigen::VectorXd& beta);

/// Per-fold path fits aggregated into a CV curve. lambda_1sd is the largest
/// lambda with cvmse within one standard deviation (across folds, at
/// lambda_min) of the minimum; `use_std_error` switches the band to the
/// standard error of the fold mean.
LassoCv cv_lasso(const Dataset& d, const FoldAssignment& folds,
                 const Eigen::VectorXd& lambdas, bool use_std_error = false);

/// OLS refit on a fixed support, zeros elsewhere (minimum-norm on rank
/// deficiency, reported through `rank_deficient`).
Eigen::VectorXd relaxed_refit(const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& y,
                              const std::vector<int>& support,
                              bool* rank_deficient = nullptr);

}  // namespace mipboost
