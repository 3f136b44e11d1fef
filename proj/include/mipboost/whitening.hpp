#pragma once

#include <Eigen/Dense>
#include <string>

#include "mipboost/data_model.hpp"

namespace mipboost {

enum class CovarianceSource { sample_mle, user_supplied };

/// Symmetric whitening transform W = Sigma^{-1/2}. Selecting on Z = X W keeps
/// a one-to-one pairing between whitened and original columns, so a selection
/// on Z's column j is reported as original feature j.
struct WhiteningTransform {
  Eigen::MatrixXd W;
  CovarianceSource source = CovarianceSource::sample_mle;
  double eigen_floor = 0.0;
  bool floored = false;  // set when any eigenvalue was raised to the floor
};

/// Maximum-likelihood covariance (divisor n) of the column-centered design.
Eigen::MatrixXd estimate_covariance(const Eigen::MatrixXd& X);

/// W = U diag(lambda^{-1/2}) U^T from the symmetric eigendecomposition of
/// Sigma. Eigenvalues are floored at `eigen_floor` before inversion
/// (default 1e-8 times the largest eigenvalue). Rejects matrices with an
/// eigenvalue below -1e-8.
WhiteningTransform zca_matrix(const Eigen::MatrixXd& sigma,
                              double eigen_floor = -1.0);

/// Z = X W with feature names preserved index-for-index.
Dataset whiten_dataset(const Dataset& d, const WhiteningTransform& t);

/// ||X - XW||_F / ||X||_F, a diagnostic for how far whitening moved the
/// design away from the original features.
double whitening_distortion(const Eigen::MatrixXd& X,
                            const WhiteningTransform& t);

/// Reads a p x p covariance matrix from a headerless CSV file.
Eigen::MatrixXd load_covariance_csv(const std::string& path);

}  // namespace mipboost
