#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mipboost/data_model.hpp"

namespace mipboost {

enum class CorrelationKind { identity, autoregressive, block };

/// Parameters of the population feature correlation matrix. The block
/// structure puts correlation rho within the active block {0..k0-1} and
/// within the inactive block, and omega across the two.
struct CorrelationSpec {
  CorrelationKind kind = CorrelationKind::identity;
  double alpha = 0.0;  // autoregressive: r_ij = alpha^|i-j|
  double rho = 0.0;
  double omega = 0.0;
  int k0 = 0;  // active-block size, block structure only
};

struct ScenarioConfig {
  std::string name = "scenario";
  int n = 0;
  int p = 0;
  int k0 = 0;
  CorrelationSpec correlation;
  Eigen::VectorXd beta_pattern;  // nonzeros occupy the first k0 entries
  double snr = 1.0;
  std::uint64_t seed = 0;
  int replicates = 1;

  void validate() const;  // throws on any violated invariant
};

struct TruthRecord {
  std::vector<int> active_set;
  Eigen::VectorXd beta;
  double theta = 0.0;          // noise standard deviation
  double population_r2 = 0.0;  // snr / (1 + snr)
};

/// Builds the p x p correlation matrix for the given structure and verifies
/// positive definiteness via a Cholesky attempt.
Eigen::MatrixXd build_correlation(const CorrelationSpec& spec, int p);

/// Draws n rows from N_p(0, R) through the Cholesky factor of R. The
/// underlying standard-normal matrix is filled column-major so the draw
/// stream is reproducible for a given seed.
Eigen::MatrixXd sample_design(int n, const Eigen::MatrixXd& R,
                              std::uint64_t seed);
Eigen::MatrixXd sample_design(int n, const Eigen::MatrixXd& R,
                              std::mt19937_64& rng);

/// theta = sqrt(beta^T R beta / snr), the noise scale realizing the requested
/// signal-to-noise ratio.
double noise_scale_for_snr(const Eigen::VectorXd& beta,
                           const Eigen::MatrixXd& R, double snr);

/// Generates y = X beta + eps for the configured scenario. One rng stream:
/// X first (column-major), then eps.
std::pair<Dataset, TruthRecord> generate_scenario(const ScenarioConfig& cfg);

/// Parses "v" or "vxc" repetition tokens, e.g. "10x7,5x3,0x90".
Eigen::VectorXd parse_beta_pattern(const std::string& text, int p);

/// Reads scenario sections from a key = value config file. Keys outside any
/// [section] act as defaults for all scenarios.
std::vector<ScenarioConfig> read_scenario_configs(const std::string& path);

}  // namespace mipboost
