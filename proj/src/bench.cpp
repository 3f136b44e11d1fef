#include "mipboost/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mipboost/forward_selection.hpp"
#include "mipboost/lasso.hpp"
#include "mipboost/least_squares.hpp"

namespace mipboost {

namespace {

constexpr int kSchemaVersion = 1;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t scenario,
                          std::uint64_t replicate, std::uint64_t tag) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ (scenario + 0x1000));
  h = splitmix64(h ^ (replicate + 0x2000));
  return splitmix64(h ^ (tag + 0x3000));
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join_support(const std::vector<int>& support) {
  std::string out;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(support[i]);
  }
  return out;
}

std::vector<int> parse_support(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ';')) {
    if (!tok.empty()) out.push_back(std::stoi(tok));
  }
  return out;
}

double sample_sd(const std::vector<double>& values, double mean) {
  if (values.size() < 2) return 0.0;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (values.size() - 1));
}

}  // namespace

ConfusionCounts confusion_counts(const std::vector<int>& selected,
                                 const std::vector<int>& truth) {
  std::set<int> sel(selected.begin(), selected.end());
  std::set<int> tru(truth.begin(), truth.end());
  ConfusionCounts c;
  for (int j : sel) {
    if (tru.count(j)) {
      ++c.tp;
    } else {
      ++c.fp;
    }
  }
  for (int j : tru) {
    if (!sel.count(j)) ++c.fn;
  }
  return c;
}

double validation_mse(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X_val,
                      const Eigen::VectorXd& y_val) {
  if (X_val.cols() != beta.size() || X_val.rows() != y_val.size()) {
    throw std::invalid_argument("validation dimension mismatch");
  }
  return (y_val - X_val * beta).squaredNorm() / y_val.size();
}

std::pair<double, double> beta_error_decomposition(
    const std::vector<Eigen::VectorXd>& beta_hats,
    const Eigen::VectorXd& true_beta) {
  if (beta_hats.size() < 2) {
    throw std::invalid_argument("need at least two replicates");
  }
  const Eigen::Index p = true_beta.size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
  for (const auto& b : beta_hats) {
    if (b.size() != p) throw std::invalid_argument("replicate dim mismatch");
    mean += b;
  }
  mean /= static_cast<double>(beta_hats.size());
  const double squared_bias = (mean - true_beta).squaredNorm();
  double variance = 0.0;
  for (const auto& b : beta_hats) variance += (b - mean).squaredNorm();
  variance /= static_cast<double>(beta_hats.size());
  return {squared_bias, variance};
}

namespace {

/// Shared pipeline prelude: the design the solver sees (whitened or plain)
/// plus any whitening diagnostics.
struct Prepared {
  Dataset design;
  double distortion = 0.0;
};

Prepared prepare_design(const Dataset& standardized,
                        const SelectOptions& options) {
  if (standardized.provenance != Provenance::standardized) {
    throw std::invalid_argument("selection expects standardized data");
  }
  Prepared prep;
  if (!options.whiten) {
    prep.design = standardized;
    return prep;
  }
  Eigen::MatrixXd sigma;
  if (options.covariance) {
    if (options.covariance->rows() != standardized.p()) {
      throw std::invalid_argument("covariance dimension mismatch");
    }
    sigma = *options.covariance;
  } else {
    if (standardized.p() >= standardized.n()) {
      throw std::invalid_argument(
          "whitening with p >= n requires a user-supplied covariance");
    }
    sigma = estimate_covariance(standardized.X);
  }
  const WhiteningTransform t = zca_matrix(sigma);
  prep.distortion = whitening_distortion(standardized.X, t);
  prep.design = whiten_dataset(standardized, t);
  return prep;
}

IcvOptions icv_options_from(const SelectOptions& options) {
  IcvOptions icv;
  icv.solver.eps_gap = options.eps_gap;
  icv.solver.eps_fs = options.eps_fs;
  icv.solver.maxtime = options.maxtime;
  icv.solver.totaltime = options.totaltime;
  icv.solver.workers = options.workers;
  icv.big_m_scale = options.big_m_scale;
  icv.refit_fold_predictions = options.refit_fold_predictions;
  if (options.standard_cv) {
    icv.fs_warm_starts = false;
    icv.chain_warm_starts = false;
    icv.use_surrogate = false;
  }
  return icv;
}

Solution final_solve_at_k(const Dataset& design, const Eigen::VectorXd& big_m,
                          const SelectOptions& options, int k) {
  const int n = static_cast<int>(design.n());
  const int p = static_cast<int>(design.p());
  MiqpProblem pb{design.X, design.y, k, big_m};
  MiqpOptions opt = icv_options_from(options).solver;
  const int fs_cap = static_cast<int>(std::min<long>(p, n - 1));
  if (!options.standard_cv && k >= 1 && k <= fs_cap) {
    const int kmax = std::min(fs_cap, k + 1);
    const FsPath path = fs_path(design.X, design.y, kmax);
    opt.warm_start = fs_warm_start(path, std::min(k, path.kmax())).second;
    if (k + 1 <= path.kmax()) {
      opt.surrogate_bound = fs_surrogate_bound(path, k, n);
    }
  }
  return solve(pb, opt);
}

std::vector<int> support_of(const Eigen::VectorXi& z) {
  std::vector<int> support;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    if (z[j] != 0) support.push_back(static_cast<int>(j));
  }
  return support;
}

}  // namespace

SelectionOutcome mipboost_select(const Dataset& standardized,
                                 const SelectOptions& options) {
  Prepared prep = prepare_design(standardized, options);
  const Dataset& design = prep.design;

  const FoldAssignment folds =
      make_folds(static_cast<int>(design.n()), options.folds,
                 options.fold_seed);
  const int c0 = std::max(2, initial_upper_bound(design, folds));

  IcvEvaluator evaluator(design, folds, icv_options_from(options));
  BfOptions bf;
  bf.delta = options.delta;
  bf.feeler_radius = options.feeler_radius;
  bf.max_restarts = options.max_restarts;
  bf.itermax = options.itermax;
  bf.a0 = 1;
  bf.c0 = c0;
  auto [k_hat, trace] =
      tune([&](int k) { return evaluator.evaluate(k); }, bf);

  SelectionOutcome out;
  out.k_hat = k_hat;
  out.trace = std::move(trace);
  out.c0 = c0;
  out.whitening_distortion = prep.distortion;
  out.final_solution =
      final_solve_at_k(design, evaluator.big_m(), options, k_hat);
  out.support = support_of(out.final_solution.z);
  // selection translates index-for-index back to the original features;
  // coefficients are always an OLS refit on the original columns
  out.beta =
      least_squares_on_support(standardized.X, standardized.y, out.support);
  return out;
}

std::vector<CvResult> cv_curve(const Dataset& standardized,
                               const SelectOptions& options, int k_from,
                               int k_to) {
  if (k_from < 0 || k_to < k_from) {
    throw std::invalid_argument("bad cv-curve range");
  }
  Prepared prep = prepare_design(standardized, options);
  const FoldAssignment folds =
      make_folds(static_cast<int>(prep.design.n()), options.folds,
                 options.fold_seed);
  IcvEvaluator evaluator(prep.design, folds, icv_options_from(options));
  std::vector<CvResult> out;
  for (int k = k_from; k <= k_to; ++k) {
    out.push_back(evaluator.evaluate(k));
  }
  return out;
}

std::string MethodSpec::label() const {
  std::string base;
  switch (kind) {
    case MethodKind::mipboost: base = "mipboost"; break;
    case MethodKind::miqp_fixed_k:
      base = fixed_k > 0 ? "miqp@" + std::to_string(fixed_k) : "miqp@k0";
      break;
    case MethodKind::lasso_min: base = "lasso_min"; break;
    case MethodKind::lasso_1sd: base = "lasso_1sd"; break;
    case MethodKind::fs: base = "fs"; break;
  }
  if (whiten) base += "+whiten";
  return base;
}

MethodSpec parse_method(const std::string& text) {
  MethodSpec spec;
  std::string base = text;
  const auto plus = text.find("+whiten");
  if (plus != std::string::npos) {
    spec.whiten = true;
    base = text.substr(0, plus);
  }
  if (base == "mipboost") {
    spec.kind = MethodKind::mipboost;
  } else if (base == "lasso_min") {
    spec.kind = MethodKind::lasso_min;
  } else if (base == "lasso_1sd") {
    spec.kind = MethodKind::lasso_1sd;
  } else if (base == "fs") {
    spec.kind = MethodKind::fs;
  } else if (base.rfind("miqp@", 0) == 0) {
    spec.kind = MethodKind::miqp_fixed_k;
    const std::string arg = base.substr(5);
    spec.fixed_k = arg == "k0" ? 0 : std::stoi(arg);
  } else {
    throw std::invalid_argument("unknown method: " + text);
  }
  return spec;
}

namespace {

struct MethodResult {
  int k_hat = 0;
  std::vector<int> support;
  Eigen::VectorXd beta;
};

MethodResult run_lasso_method(const Dataset& design,
                              const Dataset& standardized,
                              const FoldAssignment& folds, bool one_sd) {
  const Eigen::VectorXd grid = lambda_path(design.X, design.y);
  const LassoCv cv = cv_lasso(design, folds, grid);
  const LassoPath path = fit_lasso_path(design.X, design.y, grid);
  const int idx = one_sd ? cv.index_1sd : cv.index_min;
  MethodResult res;
  for (int j = 0; j < design.p(); ++j) {
    if (path.betas[idx][j] != 0.0) res.support.push_back(j);
  }
  res.k_hat = static_cast<int>(res.support.size());
  res.beta =
      least_squares_on_support(standardized.X, standardized.y, res.support);
  return res;
}

MethodResult run_fs_method(const Dataset& design, const Dataset& standardized,
                           const FoldAssignment& folds, int fs_kmax) {
  const int n = static_cast<int>(design.n());
  const int p = static_cast<int>(design.p());
  int kmax = fs_kmax > 0 ? fs_kmax : std::min({p, n - 1, 100});

  // fold paths share one CV curve over subset sizes
  int kcap = kmax;
  for (int f = 1; f <= folds.v; ++f) {
    const int n_tr = static_cast<int>(folds.rows_not_in_fold(f).size());
    kcap = std::min(kcap, std::min(p, n_tr - 1));
  }
  std::vector<double> cvmse(kcap, 0.0);
  for (int f = 1; f <= folds.v; ++f) {
    const auto train = folds.rows_not_in_fold(f);
    const auto test = folds.rows_in_fold(f);
    Eigen::MatrixXd Xtr(train.size(), p);
    Eigen::VectorXd ytr(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
      Xtr.row(i) = design.X.row(train[i]);
      ytr[i] = design.y[train[i]];
    }
    const FsPath path = fs_path(Xtr, ytr, kcap);
    for (int k = 1; k <= kcap; ++k) {
      double sse = 0.0;
      for (int row : test) {
        const double pred = design.X.row(row) * path.coefficients[k - 1];
        sse += (design.y[row] - pred) * (design.y[row] - pred);
      }
      cvmse[k - 1] += sse / static_cast<double>(test.size());
    }
  }
  int best_k = 1;
  for (int k = 2; k <= kcap; ++k) {
    if (cvmse[k - 1] < cvmse[best_k - 1]) best_k = k;
  }

  const FsPath full = fs_path(design.X, design.y, best_k);
  MethodResult res;
  res.support = full.supports[best_k - 1];
  res.k_hat = best_k;
  res.beta =
      least_squares_on_support(standardized.X, standardized.y, res.support);
  return res;
}

std::string settings_snapshot(const SelectOptions& o, const MethodSpec& m,
                              const BenchOptions& b) {
  std::ostringstream ss;
  ss << "folds=" << o.folds << ";fold_seed=" << o.fold_seed
     << ";delta=" << o.delta << ";lf=" << o.feeler_radius
     << ";restarts=" << o.max_restarts << ";eps_gap=" << o.eps_gap
     << ";eps_fs=" << o.eps_fs << ";maxtime=" << o.maxtime
     << ";totaltime=" << o.totaltime << ";c=" << o.big_m_scale
     << ";whiten=" << (m.whiten ? 1 : 0)
     << ";standard_cv=" << (o.standard_cv ? 1 : 0)
     << ";val_n=" << b.validation_n << ";fs_kmax=" << b.fs_kmax
     << ";schema=" << kSchemaVersion;
  return ss.str();
}

}  // namespace

std::vector<RunRow> run_experiment(const std::vector<ScenarioConfig>& scenarios,
                                   const std::vector<MethodSpec>& methods,
                                   int replicates, std::uint64_t seed,
                                   const BenchOptions& options) {
  struct Task {
    int scenario_index;
    int replicate;
    MethodSpec method;
  };
  std::vector<Task> tasks;
  for (int si = 0; si < static_cast<int>(scenarios.size()); ++si) {
    const int reps =
        replicates > 0 ? replicates : scenarios[si].replicates;
    for (int r = 0; r < reps; ++r) {
      for (const auto& m : methods) tasks.push_back({si, r, m});
    }
  }

  std::vector<RunRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};

  auto run_one = [&](const Task& task) {
    const ScenarioConfig& base = scenarios[task.scenario_index];
    RunRow row;
    row.scenario = base.name;
    row.replicate = task.replicate;
    row.method = task.method.label();
    row.n = base.n;
    row.p = base.p;
    row.k0 = base.k0;
    row.snr = base.snr;
    row.seed_train =
        derive_seed(seed, task.scenario_index, task.replicate, 0);
    row.seed_val = derive_seed(seed, task.scenario_index, task.replicate, 1);
    if (row.seed_train == row.seed_val) {
      throw std::logic_error("seed bookkeeping collision");
    }

    SelectOptions so = options.select;
    so.whiten = task.method.whiten;
    so.fold_seed = derive_seed(seed, task.scenario_index, task.replicate, 2);
    row.settings = settings_snapshot(so, task.method, options);

    const auto t0 = std::chrono::steady_clock::now();
    try {
      ScenarioConfig cfg_train = base;
      cfg_train.seed = row.seed_train;
      auto [train_raw, truth] = generate_scenario(cfg_train);

      ScenarioConfig cfg_val = base;
      cfg_val.seed = row.seed_val;
      if (options.validation_n > 0) cfg_val.n = options.validation_n;
      auto [val_raw, val_truth] = generate_scenario(cfg_val);
      (void)val_truth;

      auto [train_std, rec] = standardize(train_raw);
      Eigen::MatrixXd X_val = val_raw.X;
      for (Eigen::Index j = 0; j < X_val.cols(); ++j) {
        X_val.col(j) =
            (val_raw.X.col(j).array() - rec.column_means[j]) /
            rec.column_stds[j];
      }
      const Eigen::VectorXd y_val = val_raw.y.array() - rec.y_mean;

      MethodResult mr;
      switch (task.method.kind) {
        case MethodKind::mipboost: {
          const SelectionOutcome out = mipboost_select(train_std, so);
          mr.k_hat = out.k_hat;
          mr.support = out.support;
          mr.beta = out.beta;
          break;
        }
        case MethodKind::miqp_fixed_k: {
          const int k =
              task.method.fixed_k > 0 ? task.method.fixed_k : base.k0;
          Prepared prep = prepare_design(train_std, so);
          const Eigen::VectorXd big_m =
              big_m_bounds(prep.design.X, prep.design.y, so.big_m_scale);
          const Solution sol =
              final_solve_at_k(prep.design, big_m, so, k);
          mr.support = support_of(sol.z);
          mr.k_hat = static_cast<int>(mr.support.size());
          mr.beta = least_squares_on_support(train_std.X, train_std.y,
                                             mr.support);
          break;
        }
        case MethodKind::lasso_min:
        case MethodKind::lasso_1sd: {
          Prepared prep = prepare_design(train_std, so);
          const FoldAssignment folds = make_folds(
              static_cast<int>(prep.design.n()), so.folds, so.fold_seed);
          mr = run_lasso_method(prep.design, train_std, folds,
                                task.method.kind == MethodKind::lasso_1sd);
          break;
        }
        case MethodKind::fs: {
          Prepared prep = prepare_design(train_std, so);
          const FoldAssignment folds = make_folds(
              static_cast<int>(prep.design.n()), so.folds, so.fold_seed);
          mr = run_fs_method(prep.design, train_std, folds, options.fs_kmax);
          break;
        }
      }

      row.k_hat = mr.k_hat;
      row.support = mr.support;
      const ConfusionCounts cc = confusion_counts(mr.support, truth.active_set);
      row.tp = cc.tp;
      row.fp = cc.fp;
      row.fn = cc.fn;
      row.validation_mse = validation_mse(mr.beta, X_val, y_val);
      row.status = "ok";
    } catch (const std::exception& e) {
      row.status = std::string("failed:") + e.what();
      row.validation_mse = std::numeric_limits<double>::quiet_NaN();
    }
    row.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return row;
  };

  const int workers = std::max(1, options.workers);
  if (workers == 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) rows[i] = run_one(tasks[i]);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= tasks.size()) return;
          rows[i] = run_one(tasks[i]);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  return rows;
}

std::vector<AggregateRow> aggregate_rows(const std::vector<RunRow>& rows) {
  struct Key {
    std::string scenario, method;
    bool operator<(const Key& o) const {
      return std::tie(scenario, method) < std::tie(o.scenario, o.method);
    }
  };
  std::map<Key, std::map<std::string, std::vector<double>>> groups;
  for (const auto& row : rows) {
    if (row.status != "ok") continue;
    auto& g = groups[{row.scenario, row.method}];
    g["tp"].push_back(row.tp);
    g["fp"].push_back(row.fp);
    g["fn"].push_back(row.fn);
    g["validation_mse"].push_back(row.validation_mse);
    g["k_hat"].push_back(row.k_hat);
  }
  std::vector<AggregateRow> out;
  for (const auto& [key, metrics] : groups) {
    for (const auto& [metric, values] : metrics) {
      AggregateRow agg;
      agg.scenario = key.scenario;
      agg.method = key.method;
      agg.metric = metric;
      agg.count = static_cast<int>(values.size());
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= values.size();
      agg.mean = mean;
      agg.sd = sample_sd(values, mean);
      out.push_back(std::move(agg));
    }
  }
  return out;
}

void write_report_csv(const std::vector<RunRow>& rows,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "row_type,schema,scenario,replicate,method,n,p,k0,snr,seed_train,"
         "seed_val,k_hat,support,tp,fp,fn,validation_mse,wall_time,status,"
         "settings,metric,mean,sd,count\n";
  for (const auto& r : rows) {
    out << "run," << kSchemaVersion << ',' << r.scenario << ','
        << r.replicate << ',' << r.method << ',' << r.n << ',' << r.p << ','
        << r.k0 << ',' << format_double(r.snr) << ',' << r.seed_train << ','
        << r.seed_val << ',' << r.k_hat << ',' << join_support(r.support)
        << ',' << r.tp << ',' << r.fp << ',' << r.fn << ','
        << format_double(r.validation_mse) << ','
        << format_double(r.wall_time) << ',' << r.status << ',' << r.settings
        << ",,,,\n";
  }
  for (const auto& a : aggregate_rows(rows)) {
    out << "aggregate," << kSchemaVersion << ',' << a.scenario
        << ",,"  // replicate blank
        << a.method << ",,,,,,,,,,,,,,,"
        << ',' << a.metric << ',' << format_double(a.mean) << ','
        << format_double(a.sd) << ',' << a.count << '\n';
  }
}

std::vector<RunRow> read_report_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty report");
  std::vector<RunRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    cells.resize(24);
    if (cells[0] != "run") continue;
    RunRow r;
    r.scenario = cells[2];
    r.replicate = std::stoi(cells[3]);
    r.method = cells[4];
    r.n = std::stoi(cells[5]);
    r.p = std::stoi(cells[6]);
    r.k0 = std::stoi(cells[7]);
    r.snr = std::stod(cells[8]);
    r.seed_train = std::stoull(cells[9]);
    r.seed_val = std::stoull(cells[10]);
    r.k_hat = std::stoi(cells[11]);
    r.support = parse_support(cells[12]);
    r.tp = std::stoi(cells[13]);
    r.fp = std::stoi(cells[14]);
    r.fn = std::stoi(cells[15]);
    r.validation_mse = std::stod(cells[16]);
    r.wall_time = std::stod(cells[17]);
    r.status = cells[18];
    r.settings = cells[19];
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_long_format_csv(const std::vector<RunRow>& rows,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "scenario,method,replicate,metric,value\n";
  for (const auto& r : rows) {
    if (r.status != "ok") continue;
    auto emit = [&](const char* metric, double value) {
      out << r.scenario << ',' << r.method << ',' << r.replicate << ','
          << metric << ',' << format_double(value) << '\n';
    };
    emit("tp", r.tp);
    emit("fp", r.fp);
    emit("fn", r.fn);
    emit("k_hat", r.k_hat);
    emit("validation_mse", r.validation_mse);
    emit("wall_time", r.wall_time);
  }
}

}  // namespace mipboost
