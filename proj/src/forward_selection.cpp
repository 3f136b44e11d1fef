#include "mipboost/forward_selection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mipboost/least_squares.hpp"

namespace mipboost {

FsPath fs_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int kmax) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  if (kmax < 1 || kmax > std::min<long>(p, n - 1)) {
    throw std::invalid_argument("kmax must lie in [1, min(p, n-1)]");
  }

  FsPath path;
  path.sse0 = y.squaredNorm();

  // Orthogonalized copies of the unselected columns; v_j stays orthogonal to
  // the span of the selected columns.
  Eigen::MatrixXd V = X;
  Eigen::VectorXd orig_norm2(p);
  for (int j = 0; j < p; ++j) orig_norm2[j] = X.col(j).squaredNorm();

  Eigen::MatrixXd Q(n, kmax);          // orthonormal basis, column per step
  Eigen::MatrixXd R =                  // X_sel = Q R in selection order
      Eigen::MatrixXd::Zero(kmax, kmax);
  Eigen::VectorXd qty(kmax);           // Q^T y
  Eigen::VectorXd r = y;               // residual against selected span
  std::vector<bool> selected(p, false);
  std::vector<int> order;
  bool rank_broke = false;

  const double dependent_tol = 1e-12;

  for (int step = 0; step < kmax; ++step) {
    int best = -1;
    double best_reduction = -1.0;
    for (int j = 0; j < p; ++j) {
      if (selected[j]) continue;
      const double norm2 = V.col(j).squaredNorm();
      if (norm2 <= dependent_tol * std::max(orig_norm2[j], 1.0)) continue;
      const double proj = V.col(j).dot(r);
      const double reduction = proj * proj / norm2;
      if (reduction > best_reduction) {
        best_reduction = reduction;
        best = j;
      }
    }

    if (best < 0) {
      // Only numerically dependent columns remain; they cannot reduce SSE.
      // Append in index order so kmax = p is still honored.
      for (int j = 0; j < p && static_cast<int>(order.size()) <= step; ++j) {
        if (!selected[j]) {
          selected[j] = true;
          order.push_back(j);
          rank_broke = true;
        }
      }
      if (static_cast<int>(order.size()) <= step) break;
    } else {
      selected[best] = true;
      order.push_back(best);
      // one re-orthogonalization pass keeps Q numerically orthonormal
      Eigen::VectorXd q = V.col(best);
      if (step > 0) {
        q -= Q.leftCols(step) * (Q.leftCols(step).transpose() * q);
      }
      const double qnorm = q.norm();
      q /= qnorm;
      Q.col(step) = q;
      for (int s = 0; s < step; ++s) R(s, step) = Q.col(s).dot(X.col(best));
      R(step, step) = q.dot(X.col(best));
      qty[step] = q.dot(y);
      const double qr = q.dot(r);
      r -= q * qr;
      for (int j = 0; j < p; ++j) {
        if (selected[j]) continue;
        V.col(j) -= q * q.dot(V.col(j));
      }
    }

    const int size = static_cast<int>(order.size());
    std::vector<int> support(order.begin(), order.end());
    std::sort(support.begin(), support.end());
    path.supports.push_back(support);
    path.selection_order = order;

    Eigen::VectorXd beta;
    if (!rank_broke) {
      // back-substitute R beta_sel = Q^T y
      Eigen::VectorXd beta_sel = R.topLeftCorner(size, size)
                                     .triangularView<Eigen::Upper>()
                                     .solve(qty.head(size));
      beta = Eigen::VectorXd::Zero(p);
      for (int s = 0; s < size; ++s) beta[order[s]] = beta_sel[s];
      path.sse.push_back(r.squaredNorm());
    } else {
      beta = least_squares_on_support(X, y, support);
      path.sse.push_back((y - X * beta).squaredNorm());
    }
    path.coefficients.push_back(std::move(beta));
  }

  return path;
}

std::pair<Eigen::VectorXi, Eigen::VectorXd> fs_warm_start(const FsPath& path,
                                                          int k) {
  const int p = path.coefficients.empty()
                    ? 0
                    : static_cast<int>(path.coefficients.front().size());
  if (k == 0) {
    return {Eigen::VectorXi::Zero(p), Eigen::VectorXd::Zero(p)};
  }
  if (k < 0 || k > path.kmax()) {
    throw std::invalid_argument("k outside the computed path range");
  }
  Eigen::VectorXi z = Eigen::VectorXi::Zero(p);
  for (int j : path.supports[k - 1]) z[j] = 1;
  return {z, path.coefficients[k - 1]};
}

std::pair<Eigen::VectorXi, Eigen::VectorXd> fs_warm_start(
    const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int k) {
  if (k == 0) {
    const int p = static_cast<int>(X.cols());
    return {Eigen::VectorXi::Zero(p), Eigen::VectorXd::Zero(p)};
  }
  return fs_warm_start(fs_path(X, y, k), k);
}

double fs_surrogate_bound(const FsPath& path, int k, int n) {
  if (k + 1 > path.kmax() || k < 0) {
    throw std::invalid_argument("surrogate bound needs the path at k+1");
  }
  return path.sse[k] / static_cast<double>(n);  // sse[k] is the size-(k+1) SSE
}

double fs_surrogate_bound(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          int k) {
  const int n = static_cast<int>(X.rows());
  if (k + 1 > std::min<long>(X.cols(), n - 1)) {
    throw std::invalid_argument("k+1 exceeds the feasible subset size");
  }
  return fs_surrogate_bound(fs_path(X, y, k + 1), k, n);
}

}  // namespace mipboost
