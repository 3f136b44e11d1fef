#include "mipboost/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "mipboost/bench.hpp"
#include "mipboost/data_model.hpp"
#include "mipboost/least_squares.hpp"
#include "mipboost/whitening.hpp"

namespace mipboost {

namespace {

namespace fs = std::filesystem;

int default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min(hw == 0 ? 1u : hw, 5u));
}

struct CliConfig {
  std::string data_path;
  std::string response = "y";
  std::string out_dir = "out";
  std::string covariance_path;
  std::string validation_path;
  std::string scenario_path;
  std::string methods = "mipboost";
  std::uint64_t seed = 1;
  int replicates = 0;  // 0 = use the per-scenario setting
  int k_from = 1;
  int k_to = 0;
  bool scale_response = false;
  bool solver_log = false;
  SelectOptions select;
};

Dataset load_standardized(const CliConfig& cfg, ScalingRecord* record) {
  std::vector<std::string> warnings;
  Dataset raw = load_csv(cfg.data_path, cfg.response, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  auto [std_data, rec] = standardize(raw, cfg.scale_response);
  if (record) *record = rec;
  return std_data;
}

void load_user_covariance(CliConfig& cfg) {
  if (!cfg.covariance_path.empty()) {
    cfg.select.covariance = load_covariance_csv(cfg.covariance_path);
  }
}

void write_selection_report(const CliConfig& cfg, const Dataset& data,
                            const ScalingRecord& rec,
                            const SelectionOutcome& outcome) {
  const fs::path dir(cfg.out_dir);
  export_bf_trace(outcome.trace, (dir / "bf_trace.csv").string());

  std::vector<CvResult> evaluated;
  for (const auto& [k, res] : outcome.trace.evaluated) evaluated.push_back(res);
  export_cv_results(evaluated, (dir / "cv_results.csv").string());

  std::ofstream sel(dir / "selection.csv");
  sel << "index,name,beta_standardized,beta_raw\n";
  const auto [beta_raw, intercept] = coefficients_to_raw(outcome.beta, rec);
  for (int j : outcome.support) {
    sel << j << ',' << data.feature_names[j] << ',' << outcome.beta[j] << ','
        << beta_raw[j] << '\n';
  }

  std::ofstream rep(dir / "report.txt");
  rep << "k_hat: " << outcome.k_hat << '\n';
  rep << "c0: " << outcome.c0 << '\n';
  rep << "support:";
  for (int j : outcome.support) rep << ' ' << data.feature_names[j];
  rep << '\n';
  rep << "final_status: " << to_string(outcome.final_solution.status) << '\n';
  rep << "final_objective: " << outcome.final_solution.objective << '\n';
  rep << "final_gap: " << outcome.final_solution.gap << '\n';
  rep << "nodes: " << outcome.final_solution.nodes << '\n';
  rep << "intercept_raw: " << intercept << '\n';
  if (cfg.select.whiten) {
    rep << "whitening_distortion: " << outcome.whitening_distortion << '\n';
  }

  if (!cfg.validation_path.empty()) {
    Dataset val_raw = load_csv(cfg.validation_path, cfg.response);
    Eigen::MatrixXd X_val = val_raw.X;
    for (Eigen::Index j = 0; j < X_val.cols(); ++j) {
      X_val.col(j) = (val_raw.X.col(j).array() - rec.column_means[j]) /
                     rec.column_stds[j];
    }
    const Eigen::VectorXd y_val =
        (val_raw.y.array() - rec.y_mean) / rec.y_std;
    rep << "validation_mse: " << validation_mse(outcome.beta, X_val, y_val)
        << '\n';
  }
}

int cmd_select(const CliConfig& cfg, bool tune_only) {
  ScalingRecord rec;
  const Dataset data = load_standardized(cfg, &rec);
  SelectOptions so = cfg.select;
  if (tune_only) {
    // no point paying for the final certified solve
    so.totaltime = cfg.select.totaltime;
  }
  const SelectionOutcome outcome = mipboost_select(data, so);
  write_selection_report(cfg, data, rec, outcome);
  std::cout << "k_hat=" << outcome.k_hat << " support_size="
            << outcome.support.size() << " status="
            << to_string(outcome.final_solution.status) << '\n';
  return 0;
}

int cmd_cv_curve(const CliConfig& cfg) {
  const Dataset data = load_standardized(cfg, nullptr);
  const int hi = cfg.k_to > 0
                     ? cfg.k_to
                     : static_cast<int>(std::min(data.p(), data.n()));
  const auto results = cv_curve(data, cfg.select, cfg.k_from, hi);
  export_cv_results(results,
                    (fs::path(cfg.out_dir) / "cv_curve.csv").string());
  std::cout << "evaluated " << results.size() << " sparsity bounds\n";
  return 0;
}

int cmd_generate(const CliConfig& cfg) {
  const auto scenarios = read_scenario_configs(cfg.scenario_path);
  const fs::path dir(cfg.out_dir);
  int files = 0;
  for (const auto& base : scenarios) {
    const int reps = cfg.replicates > 0 ? cfg.replicates : base.replicates;
    for (int r = 0; r < reps; ++r) {
      ScenarioConfig cfg_r = base;
      cfg_r.seed = base.seed + static_cast<std::uint64_t>(r);
      auto [data, truth] = generate_scenario(cfg_r);
      const std::string stem = base.name + "_rep" + std::to_string(r);
      save_csv(data, (dir / (stem + ".csv")).string());
      std::ofstream tf(dir / (stem + "_truth.csv"));
      tf << "index,beta\n";
      for (int j : truth.active_set) {
        tf << j << ',' << truth.beta[j] << '\n';
      }
      tf << "# theta," << truth.theta << '\n';
      tf << "# population_r2," << truth.population_r2 << '\n';
      files += 2;
    }
  }
  std::cout << "wrote " << files << " files under " << cfg.out_dir << '\n';
  return 0;
}

int cmd_bench(const CliConfig& cfg, int workers) {
  const auto scenarios = read_scenario_configs(cfg.scenario_path);
  std::vector<MethodSpec> methods;
  std::stringstream ss(cfg.methods);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) methods.push_back(parse_method(tok));
  }
  if (methods.empty()) throw std::invalid_argument("no methods given");

  BenchOptions bo;
  bo.select = cfg.select;
  bo.workers = workers;
  const auto rows =
      run_experiment(scenarios, methods, cfg.replicates, cfg.seed, bo);
  const fs::path dir(cfg.out_dir);
  write_report_csv(rows, (dir / "report.csv").string());
  write_long_format_csv(rows, (dir / "report_long.csv").string());
  int failed = 0;
  for (const auto& r : rows) {
    if (r.status != "ok") ++failed;
  }
  std::cout << "ran " << rows.size() << " runs (" << failed << " failed)\n";
  return failed == 0 ? 0 : 2;
}

int cmd_whiten(const CliConfig& cfg) {
  ScalingRecord rec;
  const Dataset data = load_standardized(cfg, &rec);
  Eigen::MatrixXd sigma;
  if (cfg.select.covariance) {
    sigma = *cfg.select.covariance;
  } else {
    if (data.p() >= data.n()) {
      throw std::invalid_argument(
          "whitening with p >= n requires --covariance (sample estimate "
          "would be singular)");
    }
    sigma = estimate_covariance(data.X);
  }
  const WhiteningTransform t = zca_matrix(sigma);
  const Dataset whitened = whiten_dataset(data, t);
  const fs::path dir(cfg.out_dir);
  save_csv(whitened, (dir / "whitened.csv").string());
  std::ofstream wf(dir / "whitening_matrix.csv");
  for (Eigen::Index i = 0; i < t.W.rows(); ++i) {
    for (Eigen::Index j = 0; j < t.W.cols(); ++j) {
      if (j) wf << ',';
      wf << t.W(i, j);
    }
    wf << '\n';
  }
  std::cout << "distortion=" << whitening_distortion(data.X, t)
            << (t.floored ? " (eigenvalue floor active)" : "") << '\n';
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"L0 feature selection for linear regression: exact best-subset "
               "solves tuned by bisection with feelers over integrated "
               "cross-validation"};
  app.set_config("--config")->configurable(false);

  CliConfig cfg;
  cfg.select.workers = default_workers();
  int workers = default_workers();

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", cfg.out_dir, "output directory")
        ->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    cmd->add_option("--folds", cfg.select.folds, "cross-validation folds")
        ->capture_default_str();
    cmd->add_option("--workers", workers, "parallel workers (max 5 by default)")
        ->capture_default_str();
  };
  auto add_data = [&](CLI::App* cmd) {
    cmd->add_option("--data", cfg.data_path, "training data CSV")->required();
    cmd->add_option("--response", cfg.response, "response column name")
        ->capture_default_str();
    cmd->add_flag("--scale-response", cfg.scale_response,
                  "scale the response to unit variance");
  };
  auto add_solver = [&](CLI::App* cmd) {
    cmd->add_option("--eps-gap", cfg.select.eps_gap, "optimality gap")
        ->capture_default_str();
    cmd->add_option("--eps-fs", cfg.select.eps_fs, "surrogate gap")
        ->capture_default_str();
    cmd->add_option("--maxtime", cfg.select.maxtime,
                    "seconds before the surrogate bound activates")
        ->capture_default_str();
    cmd->add_option("--totaltime", cfg.select.totaltime,
                    "hard per-solve wall cap in seconds")
        ->capture_default_str();
    cmd->add_option("--big-m-scale", cfg.select.big_m_scale,
                    "box bound scale on the least-squares fit")
        ->capture_default_str();
    cmd->add_flag("--standard-cv", cfg.select.standard_cv,
                  "plain per-fold solves (no warm starts, no surrogate)");
  };
  auto add_tuner = [&](CLI::App* cmd) {
    cmd->add_option("--delta", cfg.select.delta, "improvement threshold")
        ->capture_default_str();
    cmd->add_option("--feeler-radius", cfg.select.feeler_radius,
                    "feeler probe distance")
        ->capture_default_str();
    cmd->add_option("--max-restarts", cfg.select.max_restarts,
                    "feeler-triggered restarts")
        ->capture_default_str();
    cmd->add_option("--itermax", cfg.select.itermax,
                    "evaluation cap (0 = automatic)")
        ->capture_default_str();
  };
  auto add_whiten = [&](CLI::App* cmd) {
    cmd->add_flag("--whiten", cfg.select.whiten,
                  "decorrelate features before selection");
    cmd->add_option("--covariance", cfg.covariance_path,
                    "covariance CSV for whitening (required when p >= n)");
  };

  CLI::App* select = app.add_subcommand(
      "select", "full pipeline: tune k, solve, refit, report");
  add_common(select);
  add_data(select);
  add_solver(select);
  add_tuner(select);
  add_whiten(select);
  select->add_option("--validation", cfg.validation_path,
                     "held-out data CSV scored with the selected model");

  CLI::App* tune_cmd =
      app.add_subcommand("tune", "stop after the bisection search");
  add_common(tune_cmd);
  add_data(tune_cmd);
  add_solver(tune_cmd);
  add_tuner(tune_cmd);
  add_whiten(tune_cmd);

  CLI::App* curve = app.add_subcommand(
      "cv-curve", "evaluate f(k) over an explicit range");
  add_common(curve);
  add_data(curve);
  add_solver(curve);
  add_whiten(curve);
  curve->add_option("--k-from", cfg.k_from, "range start")
      ->capture_default_str();
  curve->add_option("--k-to", cfg.k_to, "range end (0 = min(p, n))")
      ->capture_default_str();

  CLI::App* generate =
      app.add_subcommand("generate", "write synthetic scenario CSVs");
  add_common(generate);
  generate->add_option("--scenarios", cfg.scenario_path, "scenario config file")
      ->required();
  generate->add_option("--replicates", cfg.replicates,
                       "override per-scenario replicate counts");

  CLI::App* bench =
      app.add_subcommand("bench", "scenario sweep with method comparison");
  add_common(bench);
  add_solver(bench);
  add_tuner(bench);
  bench->add_option("--scenarios", cfg.scenario_path, "scenario config file")
      ->required();
  bench->add_option("--methods", cfg.methods,
                    "comma list: mipboost, lasso_min, lasso_1sd, fs, miqp@k "
                    "(+whiten suffix)")
      ->capture_default_str();
  bench->add_option("--replicates", cfg.replicates,
                    "override per-scenario replicate counts");

  CLI::App* whiten =
      app.add_subcommand("whiten", "write the whitened design matrix");
  add_common(whiten);
  add_data(whiten);
  add_whiten(whiten);

  app.require_subcommand(1);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    std::filesystem::create_directories(cfg.out_dir);
    load_user_covariance(cfg);
    cfg.select.workers = workers;
    if (app.got_subcommand(select)) return cmd_select(cfg, false);
    if (app.got_subcommand(tune_cmd)) return cmd_select(cfg, true);
    if (app.got_subcommand(curve)) return cmd_cv_curve(cfg);
    if (app.got_subcommand(generate)) return cmd_generate(cfg);
    if (app.got_subcommand(bench)) return cmd_bench(cfg, workers);
    if (app.got_subcommand(whiten)) return cmd_whiten(cfg);
  } catch (const std::exception& e) {
    nlohmann::json err{{"error", e.what()}};
    std::cerr << err.dump() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace mipboost
