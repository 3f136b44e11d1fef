#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mipboost {

enum class Provenance { raw, standardized, whitened };

/// Per-column centering/scaling state, kept so coefficients and data can be
/// mapped back to raw units.
struct ScalingRecord {
  Eigen::VectorXd column_means;
  Eigen::VectorXd column_stds;  // strictly positive
  double y_mean = 0.0;
  double y_std = 1.0;  // 1.0 unless the response was scaled
};

/// Response vector plus design matrix with column metadata. Immutable by
/// convention: operations return new Dataset values.
struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::vector<std::string> feature_names;
  Provenance provenance = Provenance::raw;
  std::optional<ScalingRecord> scaling;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
};

/// Partition of n observations into v cross-validation folds labelled 1..v.
struct FoldAssignment {
  int v = 0;
  std::vector<int> assignment;  // length n, values in {1..v}
  std::uint64_t seed = 0;

  std::vector<int> rows_in_fold(int fold) const;
  std::vector<int> rows_not_in_fold(int fold) const;
};

/// Reads a comma-delimited numeric table with a header row. The named (or
/// 0-based indexed) response column becomes y; the remaining columns become
/// features in file order. Zero-variance feature columns are permitted but
/// reported through `warnings` when given.
Dataset load_csv(const std::string& path, const std::string& response_column,
                 std::vector<std::string>* warnings = nullptr);
Dataset load_csv(const std::string& path, int response_index,
                 std::vector<std::string>* warnings = nullptr);

/// Writes the dataset in the same CSV dialect load_csv reads.
void save_csv(const Dataset& d, const std::string& path,
              const std::string& response_name = "y");

/// Centers y (optionally also scaling it) and transforms every feature column
/// to mean 0, sample standard deviation 1 (divisor n-1).
/// Fails on zero-variance columns and on data that is not raw.
std::pair<Dataset, ScalingRecord> standardize(const Dataset& d,
                                              bool scale_response = false);

/// Inverse of standardize; reproduces raw values from the record.
Dataset unstandardize(const Dataset& d, const ScalingRecord& record);

/// Maps standardized-scale coefficients back to raw-unit coefficients plus an
/// intercept term.
std::pair<Eigen::VectorXd, double> coefficients_to_raw(
    const Eigen::VectorXd& beta_std, const ScalingRecord& record);

/// Uniformly random partition into v near-equal folds: seeded shuffle, then
/// round-robin dealing. Deterministic given (n, v, seed).
FoldAssignment make_folds(int n, int v, std::uint64_t seed);

/// Appends all pairwise products ("a*b") and the squares ("a^2") of every
/// column not in `square_exclusions` to the original features.
Dataset expand_features(const Dataset& d,
                        const std::vector<std::string>& square_exclusions);

}  // namespace mipboost
