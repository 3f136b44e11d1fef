#pragma once

#include <Eigen/Dense>
#include <vector>

namespace mipboost {

/// Least-squares fit of y on all columns of X. Falls back to the
/// minimum-norm solution when X is rank deficient or undersampled.
Eigen::VectorXd least_squares(const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& y,
                              bool* rank_deficient = nullptr);

/// Least-squares fit restricted to `support` columns; zeros elsewhere.
Eigen::VectorXd least_squares_on_support(const Eigen::MatrixXd& X,
                                         const Eigen::VectorXd& y,
                                         const std::vector<int>& support,
                                         bool* rank_deficient = nullptr);

/// Minimizes ||y - X beta||^2 subject to |beta_j| <= bounds_j on the given
/// support (zeros elsewhere), by cyclic coordinate descent with clipping.
/// Starts from the unconstrained fit; exact when no bound is active.
Eigen::VectorXd box_least_squares_on_support(const Eigen::MatrixXd& X,
                                             const Eigen::VectorXd& y,
                                             const std::vector<int>& support,
                                             const Eigen::VectorXd& bounds,
                                             double tol = 1e-12,
                                             int max_sweeps = 2000);

/// (1/n) ||y - X beta||^2.
double mean_squared_error(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& beta);

}  // namespace mipboost
