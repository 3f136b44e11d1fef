#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace mipboost {

/// Greedy forward-selection path up to kmax features. Supports are nested
/// and in-sample SSE is nonincreasing in the subset size.
struct FsPath {
  std::vector<int> selection_order;            // column added at each step
  std::vector<std::vector<int>> supports;      // sorted support per size 1..kmax
  std::vector<Eigen::VectorXd> coefficients;   // full-length beta per size
  std::vector<double> sse;                     // in-sample SSE per size
  double sse0 = 0.0;                           // ||y||^2, the empty model

  int kmax() const { return static_cast<int>(supports.size()); }
};

/// Exact greedy forward selection: each step adds the feature with the
/// largest SSE reduction, computed against an incrementally updated
/// orthonormal basis of the selected columns. Ties break to the lowest
/// column index. Numerically dependent columns are only added when kmax
/// forces them.
FsPath fs_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int kmax);

/// Selection indicators and exact least-squares coefficients at size k.
/// k = 0 yields zero vectors.
std::pair<Eigen::VectorXi, Eigen::VectorXd> fs_warm_start(const FsPath& path,
                                                          int k);
std::pair<Eigen::VectorXi, Eigen::VectorXd> fs_warm_start(
    const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int k);

/// In-sample MSE of forward selection at k+1 features, used as a surrogate
/// reference bound when solving at sparsity k.
double fs_surrogate_bound(const FsPath& path, int k, int n);
double fs_surrogate_bound(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          int k);

}  // namespace mipboost
