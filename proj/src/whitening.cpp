#include "mipboost/whitening.hpp"

#include <Eigen/Eigenvalues>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mipboost {

Eigen::MatrixXd estimate_covariance(const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.rows();
  if (n < 2) throw std::invalid_argument("covariance needs n >= 2");
  Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
  Eigen::MatrixXd sigma =
      (centered.transpose() * centered) / static_cast<double>(n);
  // enforce exact symmetry against accumulation-order noise
  return 0.5 * (sigma + sigma.transpose());
}

WhiteningTransform zca_matrix(const Eigen::MatrixXd& sigma,
                              double eigen_floor) {
  if (sigma.rows() != sigma.cols()) {
    throw std::invalid_argument("covariance must be square");
  }
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-8) {
    throw std::invalid_argument("covariance must be symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition failed");
  }
  const Eigen::VectorXd& evals = es.eigenvalues();
  if (evals.minCoeff() < -1e-8) {
    throw std::invalid_argument(
        "matrix is not a covariance (eigenvalue " +
        std::to_string(evals.minCoeff()) + ")");
  }

  WhiteningTransform t;
  t.eigen_floor =
      eigen_floor >= 0.0 ? eigen_floor : 1e-8 * std::max(evals.maxCoeff(), 0.0);
  if (t.eigen_floor <= 0.0) t.eigen_floor = 1e-12;

  Eigen::VectorXd inv_sqrt(evals.size());
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    double lambda = evals[i];
    if (lambda < t.eigen_floor) {
      lambda = t.eigen_floor;
      t.floored = true;
    }
    inv_sqrt[i] = 1.0 / std::sqrt(lambda);
  }
  t.W = es.eigenvectors() * inv_sqrt.asDiagonal() *
        es.eigenvectors().transpose();
  t.W = 0.5 * (t.W + t.W.transpose());
  return t;
}

Dataset whiten_dataset(const Dataset& d, const WhiteningTransform& t) {
  if (d.provenance != Provenance::standardized) {
    throw std::invalid_argument("whiten_dataset expects standardized data");
  }
  if (t.W.rows() != d.p()) {
    throw std::invalid_argument("whitening matrix dimension mismatch");
  }
  Dataset out = d;
  out.X = d.X * t.W;
  out.provenance = Provenance::whitened;
  return out;
}

double whitening_distortion(const Eigen::MatrixXd& X,
                            const WhiteningTransform& t) {
  const double denom = X.norm();
  if (denom == 0.0) return 0.0;
  return (X - X * t.W).norm() / denom;
}

Eigen::MatrixXd load_covariance_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open covariance file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error("non-numeric cell at line " +
                                 std::to_string(lineno) + " of " + path);
      }
    }
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw std::runtime_error("empty covariance file: " + path);
  const std::size_t p = rows.size();
  Eigen::MatrixXd sigma(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    if (rows[i].size() != p) {
      throw std::runtime_error("covariance file is not square: row " +
                               std::to_string(i + 1) + " has " +
                               std::to_string(rows[i].size()) + " cells");
    }
    for (std::size_t j = 0; j < p; ++j) sigma(i, j) = rows[i][j];
  }
  return sigma;
}

}  // namespace mipboost
