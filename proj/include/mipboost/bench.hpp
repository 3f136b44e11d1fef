#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mipboost/bf_tuner.hpp"
#include "mipboost/data_model.hpp"
#include "mipboost/miqp.hpp"
#include "mipboost/scenario.hpp"
#include "mipboost/whitening.hpp"

namespace mipboost {

struct ConfusionCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;
};

ConfusionCounts confusion_counts(const std::vector<int>& selected,
                                 const std::vector<int>& truth);

/// (1/n_val) ||y_val - X_val beta||^2.
double validation_mse(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X_val,
                      const Eigen::VectorXd& y_val);

/// Squared bias ||mean(beta_hat) - beta||^2 and variance
/// mean_r ||beta_hat_r - mean(beta_hat)||^2 across replicates.
std::pair<double, double> beta_error_decomposition(
    const std::vector<Eigen::VectorXd>& beta_hats,
    const Eigen::VectorXd& true_beta);

/// Settings of one full selection run (tuning + final solve + refit).
struct SelectOptions {
  int folds = 10;
  std::uint64_t fold_seed = 1;
  double delta = 0.01;
  int feeler_radius = 1;
  int max_restarts = 1;
  int itermax = 0;  // 0 = automatic
  double eps_gap = 0.05;
  double eps_fs = 0.05;
  double maxtime = 180.0;
  double totaltime = 600.0;
  double big_m_scale = 5.0;
  bool whiten = false;
  std::optional<Eigen::MatrixXd> covariance;  // user covariance for whitening
  int workers = 1;
  bool standard_cv = false;  // disable warm starts/surrogate (baseline mode)
  bool refit_fold_predictions = false;
};

struct SelectionOutcome {
  int k_hat = 0;
  std::vector<int> support;  // original feature indices
  Eigen::VectorXd beta;      // OLS refit on the original standardized columns
  BfTrace trace;
  Solution final_solution;
  double whitening_distortion = 0.0;
  int c0 = 0;
};

/// The full pipeline on standardized data: optional whitening, lasso-derived
/// upper bound, bisection-with-feelers tuning over integrated CV, a final
/// solve at the chosen k on all rows, and an OLS refit on the selected
/// original columns.
SelectionOutcome mipboost_select(const Dataset& standardized,
                                 const SelectOptions& options);

/// Evaluates f(k) on an explicit range instead of tuning (curve exports).
std::vector<CvResult> cv_curve(const Dataset& standardized,
                               const SelectOptions& options, int k_from,
                               int k_to);

enum class MethodKind { mipboost, miqp_fixed_k, lasso_min, lasso_1sd, fs };

struct MethodSpec {
  MethodKind kind = MethodKind::mipboost;
  bool whiten = false;
  int fixed_k = 0;  // miqp_fixed_k: 0 = the scenario's true k0
  std::string label() const;
};

/// Parses "mipboost", "lasso_min", "lasso_1sd", "fs", "miqp@k" with an
/// optional "+whiten" suffix.
MethodSpec parse_method(const std::string& text);

struct BenchOptions {
  SelectOptions select;
  int validation_n = 0;  // 0 = same n as training
  int fs_kmax = 0;       // forward-selection CV range cap; 0 = automatic
  int workers = 1;       // concurrent runs
};

struct RunRow {
  std::string scenario;
  int replicate = 0;
  std::string method;
  int n = 0, p = 0, k0 = 0;
  double snr = 0.0;
  std::uint64_t seed_train = 0, seed_val = 0;
  int k_hat = 0;
  std::vector<int> support;
  int tp = 0, fp = 0, fn = 0;
  double validation_mse = 0.0;
  double wall_time = 0.0;
  std::string status = "ok";  // or failed:<reason>
  std::string settings;
};

struct AggregateRow {
  std::string scenario;
  std::string method;
  std::string metric;
  double mean = 0.0;
  double sd = 0.0;
  int count = 0;
};

/// Generates, selects, refits, and scores every (scenario, replicate,
/// method) combination. Failures become failed rows, never abort the sweep.
std::vector<RunRow> run_experiment(const std::vector<ScenarioConfig>& scenarios,
                                   const std::vector<MethodSpec>& methods,
                                   int replicates, std::uint64_t seed,
                                   const BenchOptions& options);

std::vector<AggregateRow> aggregate_rows(const std::vector<RunRow>& rows);

/// Writes run rows followed by aggregate rows; doubles are formatted
/// round-trip exact so aggregates can be recomputed from the file.
void write_report_csv(const std::vector<RunRow>& rows, const std::string& path);
std::vector<RunRow> read_report_csv(const std::string& path);

/// Long-format metric rows (scenario, method, metric, replicate, value) for
/// external plotting tools.
void write_long_format_csv(const std::vector<RunRow>& rows,
                           const std::string& path);

}  // namespace mipboost
