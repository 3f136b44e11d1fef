#include "mipboost/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mipboost/least_squares.hpp"

namespace mipboost {

namespace {

double soft_threshold(double value, double threshold) {
  const double mag = std::abs(value) - threshold;
  return mag > 0.0 ? std::copysign(mag, value) : 0.0;
}

double lasso_objective(const Eigen::VectorXd& r, const Eigen::VectorXd& beta,
                       double lambda, double n) {
  return r.squaredNorm() / (2.0 * n) + lambda * beta.lpNorm<1>();
}

}  // namespace

Eigen::VectorXd lambda_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            int n_lambda, double ratio) {
  if (n_lambda < 2) throw std::invalid_argument("need at least two grid points");
  if (ratio <= 0.0 || ratio >= 1.0) {
    throw std::invalid_argument("ratio must lie in (0, 1)");
  }
  const double n = static_cast<double>(X.rows());
  const double lambda_max = (X.transpose() * y).cwiseAbs().maxCoeff() / n;
  if (lambda_max <= 0.0) {
    throw std::invalid_argument("lambda_max is zero (y orthogonal to X)");
  }
  Eigen::VectorXd grid(n_lambda);
  const double log_max = std::log(lambda_max);
  const double log_min = std::log(ratio * lambda_max);
  for (int i = 0; i < n_lambda; ++i) {
    const double t = static_cast<double>(i) / (n_lambda - 1);
    grid[i] = std::exp(log_max + t * (log_min - log_max));
  }
  grid[0] = lambda_max;  // exact endpoint
  return grid;
}

Eigen::VectorXd coordinate_descent(const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& y, double lambda,
                                   Eigen::VectorXd warm,
                                   CdDiagnostics* diagnostics, double tol,
                                   int max_sweeps) {
  const int p = static_cast<int>(X.cols());
  const double n = static_cast<double>(X.rows());
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  Eigen::VectorXd beta =
      warm.size() == p ? std::move(warm) : Eigen::VectorXd::Zero(p);

  Eigen::VectorXd norm2(p);
  for (int j = 0; j < p; ++j) norm2[j] = X.col(j).squaredNorm();
  Eigen::VectorXd r = y - X * beta;

  double residual = 0.0;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (int j = 0; j < p; ++j) {
      if (norm2[j] <= 0.0) {
        if (beta[j] != 0.0) {
          r += X.col(j) * beta[j];
          beta[j] = 0.0;
        }
        continue;
      }
      const double rho = X.col(j).dot(r) + norm2[j] * beta[j];
      const double updated = soft_threshold(rho, n * lambda) / norm2[j];
      const double delta = updated - beta[j];
      if (delta != 0.0) {
        r -= X.col(j) * delta;
        beta[j] = updated;
      }
    }
    residual = lasso_kkt_residual(X, y, lambda, beta);
    if (diagnostics) {
      diagnostics->sweep_objectives.push_back(
          lasso_objective(r, beta, lambda, n));
      diagnostics->sweeps = sweep + 1;
      diagnostics->kkt_residual = residual;
    }
    if (residual <= tol) return beta;
  }
  throw std::runtime_error(
      "coordinate descent did not converge: KKT residual " +
      std::to_string(residual));
}

double lasso_kkt_residual(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          double lambda, const Eigen::VectorXd& beta) {
  const double n = static_cast<double>(X.rows());
  const Eigen::VectorXd corr = X.transpose() * (y - X * beta) / n;
  double residual = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta[j] == 0.0) {
      residual = std::max(residual, std::abs(corr[j]) - lambda);
    } else {
      residual = std::max(
          residual, std::abs(corr[j] - lambda * (beta[j] > 0 ? 1.0 : -1.0)));
    }
  }
  return residual;
}

LassoPath fit_lasso_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& lambdas) {
  for (Eigen::Index i = 1; i < lambdas.size(); ++i) {
    if (lambdas[i] >= lambdas[i - 1]) {
      throw std::invalid_argument("lambda grid must be strictly descending");
    }
  }
  LassoPath path;
  path.lambdas = lambdas;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(X.cols());
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    beta = coordinate_descent(X, y, lambdas[i], beta);
    path.betas.push_back(beta);
    path.support_sizes.push_back(
        static_cast<int>((beta.array() != 0.0).count()));
  }
  return path;
}

LassoCv cv_lasso(const Dataset& d, const FoldAssignment& folds,
                 const Eigen::VectorXd& lambdas, bool use_std_error) {
  const int v = folds.v;
  const int n_lambda = static_cast<int>(lambdas.size());
  Eigen::MatrixXd fold_mse(v, n_lambda);

  for (int f = 1; f <= v; ++f) {
    const std::vector<int> train = folds.rows_not_in_fold(f);
    const std::vector<int> test = folds.rows_in_fold(f);
    Eigen::MatrixXd Xtr(train.size(), d.p());
    Eigen::VectorXd ytr(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
      Xtr.row(i) = d.X.row(train[i]);
      ytr[i] = d.y[train[i]];
    }
    const LassoPath path = fit_lasso_path(Xtr, ytr, lambdas);
    for (int i = 0; i < n_lambda; ++i) {
      double sse = 0.0;
      for (int row : test) {
        const double pred = d.X.row(row) * path.betas[i];
        sse += (d.y[row] - pred) * (d.y[row] - pred);
      }
      fold_mse(f - 1, i) = sse / static_cast<double>(test.size());
    }
  }

  LassoCv cv;
  cv.lambdas = lambdas;
  cv.cvmse = fold_mse.colwise().mean();
  cv.fold_sd.resize(n_lambda);
  for (int i = 0; i < n_lambda; ++i) {
    const double mean = cv.cvmse[i];
    const double ss = (fold_mse.col(i).array() - mean).square().sum();
    cv.fold_sd[i] = std::sqrt(ss / std::max(1, v - 1));
  }

  cv.index_min = 0;
  for (int i = 1; i < n_lambda; ++i) {
    if (cv.cvmse[i] < cv.cvmse[cv.index_min]) cv.index_min = i;
  }
  double band = cv.fold_sd[cv.index_min];
  if (use_std_error) band /= std::sqrt(static_cast<double>(v));
  cv.index_1sd = cv.index_min;
  for (int i = 0; i < n_lambda; ++i) {  // grid descends, so first hit is largest
    if (cv.cvmse[i] <= cv.cvmse[cv.index_min] + band) {
      cv.index_1sd = i;
      break;
    }
  }
  cv.lambda_min = lambdas[cv.index_min];
  cv.lambda_1sd = lambdas[cv.index_1sd];

  const LassoPath full = fit_lasso_path(d.X, d.y, lambdas);
  cv.support_sizes = full.support_sizes;
  return cv;
}

Eigen::VectorXd relaxed_refit(const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& y,
                              const std::vector<int>& support,
                              bool* rank_deficient) {
  if (support.empty()) throw std::invalid_argument("empty support");
  if (static_cast<long>(support.size()) > X.rows() - 1) {
    throw std::invalid_argument("support larger than n - 1");
  }
  return least_squares_on_support(X, y, support, rank_deficient);
}

}  // namespace mipboost
