#include "mipboost/least_squares.hpp"

#include <cmath>

namespace mipboost {

Eigen::VectorXd least_squares(const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& y, bool* rank_deficient) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(X);
  if (rank_deficient) {
    *rank_deficient = cod.rank() < std::min(X.rows(), X.cols());
  }
  return cod.solve(y);  // minimum-norm solution if rank deficient
}

Eigen::VectorXd least_squares_on_support(const Eigen::MatrixXd& X,
                                         const Eigen::VectorXd& y,
                                         const std::vector<int>& support,
                                         bool* rank_deficient) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(X.cols());
  if (support.empty()) {
    if (rank_deficient) *rank_deficient = false;
    return beta;
  }
  Eigen::MatrixXd Xs(X.rows(), support.size());
  for (std::size_t i = 0; i < support.size(); ++i) {
    Xs.col(i) = X.col(support[i]);
  }
  const Eigen::VectorXd bs = least_squares(Xs, y, rank_deficient);
  for (std::size_t i = 0; i < support.size(); ++i) beta[support[i]] = bs[i];
  return beta;
}

Eigen::VectorXd box_least_squares_on_support(const Eigen::MatrixXd& X,
                                             const Eigen::VectorXd& y,
                                             const std::vector<int>& support,
                                             const Eigen::VectorXd& bounds,
                                             double tol, int max_sweeps) {
  Eigen::VectorXd beta = least_squares_on_support(X, y, support);

  bool violates = false;
  for (int j : support) {
    if (std::abs(beta[j]) > bounds[j]) {
      violates = true;
      break;
    }
  }
  if (!violates) return beta;

  for (int j : support) {
    beta[j] = std::clamp(beta[j], -bounds[j], bounds[j]);
  }
  Eigen::VectorXd r = y - X * beta;
  const double scale = std::max(1.0, y.squaredNorm());
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (int j : support) {
      const double norm2 = X.col(j).squaredNorm();
      if (norm2 <= 0.0) continue;
      const double rho = X.col(j).dot(r) + norm2 * beta[j];
      const double updated = std::clamp(rho / norm2, -bounds[j], bounds[j]);
      const double delta = updated - beta[j];
      if (delta != 0.0) {
        r -= X.col(j) * delta;
        beta[j] = updated;
        max_change = std::max(max_change, std::abs(delta) * std::sqrt(norm2));
      }
    }
    if (max_change * max_change <= tol * scale) break;
  }
  return beta;
}

double mean_squared_error(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& beta) {
  return (y - X * beta).squaredNorm() / static_cast<double>(y.size());
}

}  // namespace mipboost
