#include "mipboost/bf_tuner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "mipboost/lasso.hpp"

namespace mipboost {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double delta_f(double f_x, double f_y, double x, double y, bool* guarded) {
  if (guarded) *guarded = false;
  if (y <= x) throw std::invalid_argument("delta_f needs x < y");
  if (std::isinf(f_x) && std::isinf(f_y)) return 0.0;
  if (std::isinf(f_y)) return -kInf;  // rising into a failed evaluation
  if (std::isinf(f_x)) return kInf;
  double den = f_x;
  if (den <= 0.0) {
    den = std::max(den, 1e-12);
    if (guarded) *guarded = true;
  }
  return -(1.0 / den) * (f_y - f_x) / (y - x);
}

int initial_upper_bound(const Dataset& d, const FoldAssignment& folds,
                        int n_lambda, double ratio) {
  const int cap = static_cast<int>(std::min(d.p(), d.n()));
  int support = 0;
  try {
    const Eigen::VectorXd grid = lambda_path(d.X, d.y, n_lambda, ratio);
    const LassoCv cv = cv_lasso(d, folds, grid);
    support = cv.support_sizes[cv.index_min];
  } catch (const std::exception&) {
    support = 0;  // fall back to the widest interval
  }
  if (support == 0) return cap;
  return std::clamp(support, 2, cap);
}

namespace {

struct TuneState {
  const CvEvaluatorFn* evaluate = nullptr;
  BfTrace trace;
  int itermax = 0;
  bool budget_hit = false;

  // memoized f(k); +inf for failures; NaN once the evaluation budget is gone
  double f(int k) {
    auto it = trace.evaluated.find(k);
    if (it != trace.evaluated.end()) {
      return std::isinf(it->second.cvmse) ? kInf : it->second.cvmse;
    }
    if (trace.evaluations >= itermax) {
      budget_hit = true;
      return std::numeric_limits<double>::quiet_NaN();
    }
    ++trace.evaluations;
    try {
      CvResult res = (*evaluate)(k);
      res.k = k;
      const double value = res.cvmse;
      trace.evaluated.emplace(k, std::move(res));
      return value;
    } catch (const std::exception&) {
      trace.failed.push_back(k);
      CvResult res;
      res.k = k;
      res.cvmse = kInf;
      trace.evaluated.emplace(k, std::move(res));
      return kInf;
    }
  }

  // smallest k in [lo, hi] whose f sits within delta * f_min of the minimum
  int sparsest_near_min(int lo, int hi, double delta) {
    double f_min = kInf;
    for (const auto& [k, res] : trace.evaluated) {
      if (k < lo || k > hi) continue;
      f_min = std::min(f_min, res.cvmse);
    }
    if (!std::isfinite(f_min)) {
      return lo;
    }
    for (const auto& [k, res] : trace.evaluated) {
      if (k < lo || k > hi) continue;
      if (res.cvmse <= f_min + delta * f_min) return k;
    }
    return lo;
  }

  // bisection on [a, c]; returns the tentative estimate, or -1 on budget
  int bisect(int a, int c, double delta) {
    while (c - a > 2) {
      const int b = (a + c) / 2;
      const double fa = f(a);
      const double fb = f(b);
      const double fc = f(c);
      if (budget_hit) return -1;
      const double df_ab = delta_f(fa, fb, a, b);
      const double df_bc = delta_f(fb, fc, b, c);
      BfDecision d{a, b, c, df_ab, df_bc, ""};
      if (df_ab <= -delta) {
        d.action = "overfit_guard_left";
        c = b;
      } else if (df_bc <= delta) {
        d.action = "left";
        c = b;
      } else {
        d.action = "right";
        a = b;
      }
      trace.decisions.push_back(std::move(d));
    }
    for (int k = a; k <= c; ++k) {
      f(k);
      if (budget_hit) return -1;
    }
    const int k_hat = sparsest_near_min(a, c, delta);
    trace.decisions.push_back({a, (a + c) / 2, c, 0.0, 0.0, "converged"});
    return k_hat;
  }
};

}  // namespace

std::pair<int, BfTrace> tune(const CvEvaluatorFn& evaluate,
                             const BfOptions& options) {
  if (options.delta <= 0.0) throw std::invalid_argument("delta must be positive");
  if (options.feeler_radius < 1) {
    throw std::invalid_argument("feeler radius must be at least 1");
  }
  if (options.a0 < 1 || options.a0 >= options.c0) {
    throw std::invalid_argument("need 1 <= a0 < c0");
  }
  if (options.max_restarts < 0) {
    throw std::invalid_argument("max_restarts must be nonnegative");
  }

  TuneState st;
  st.evaluate = &evaluate;
  st.itermax = options.itermax > 0
                   ? options.itermax
                   : 3 * static_cast<int>(std::ceil(std::log2(
                             std::max(2, options.c0)))) +
                         10;

  const double delta = options.delta;
  const int lf = options.feeler_radius;
  int a = options.a0;
  int c = options.c0;
  int k_hat = options.a0;

  for (int attempt = 0; attempt <= options.max_restarts; ++attempt) {
    const int tentative = st.bisect(a, c, delta);
    if (tentative < 0) break;  // evaluation budget exhausted
    k_hat = tentative;

    const int kl = std::max(k_hat - lf, 1);
    const int kr = std::min(k_hat + lf, options.c0);
    // a missing feeler at the domain edge counts as a flat slope
    double left_slope = 0.0;
    double right_slope = 0.0;
    if (kl < k_hat) left_slope = delta_f(st.f(kl), st.f(k_hat), kl, k_hat);
    if (kr > k_hat) right_slope = delta_f(st.f(k_hat), st.f(kr), k_hat, kr);
    if (st.budget_hit) break;

    const bool may_restart = attempt < options.max_restarts;
    if (right_slope > delta && may_restart && k_hat + lf < options.c0) {
      a = k_hat + lf;
      c = options.c0;
      ++st.trace.restarts;
      st.trace.decisions.push_back(
          {a, 0, c, left_slope, right_slope, "feeler_grow_restart"});
      continue;
    }
    if (left_slope <= delta && right_slope <= delta && may_restart &&
        k_hat - lf > 1) {
      a = 1;
      c = k_hat - lf;
      ++st.trace.restarts;
      st.trace.decisions.push_back(
          {a, 0, c, left_slope, right_slope, "feeler_sparse_restart"});
      continue;
    }
    st.trace.decisions.push_back(
        {a, k_hat, c, left_slope, right_slope, "accept"});
    break;
  }

  if (st.budget_hit) {
    // best-so-far with the sparsity tie rule over everything evaluated
    k_hat = st.sparsest_near_min(1, options.c0, delta);
    st.trace.decisions.push_back({0, k_hat, 0, 0.0, 0.0, "itermax"});
  }

  st.trace.k_hat = k_hat;
  BfTrace trace = std::move(st.trace);
  return {k_hat, std::move(trace)};
}

void export_bf_trace(const BfTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << "k,cvmse,fold_sd,decision\n";
  for (const auto& [k, res] : trace.evaluated) {
    const bool failed =
        std::find(trace.failed.begin(), trace.failed.end(), k) !=
        trace.failed.end();
    out << k << ',' << res.cvmse << ',' << res.fold_sd << ','
        << (k == trace.k_hat ? "k_hat" : (failed ? "failed" : "")) << '\n';
  }
}

}  // namespace mipboost
