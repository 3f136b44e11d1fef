#include "mipboost/miqp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "mipboost/least_squares.hpp"

namespace mipboost {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr char kFree = 0;
constexpr char kFixedIn = 1;
constexpr char kFixedOut = 2;

struct SolverContext {
  const MiqpProblem* pb = nullptr;
  Eigen::MatrixXd G;     // X^T X
  Eigen::VectorXd Xty;   // X^T y
  Eigen::VectorXd diagG;
  double yty = 0.0;
  int n = 0;
  int p = 0;
  double scale = 1.0;  // objective magnitude used for tolerances

  explicit SolverContext(const MiqpProblem& problem) : pb(&problem) {
    n = static_cast<int>(problem.X.rows());
    p = static_cast<int>(problem.X.cols());
    G.noalias() = problem.X.transpose() * problem.X;
    Xty.noalias() = problem.X.transpose() * problem.y;
    diagG = G.diagonal();
    yty = problem.y.squaredNorm();
    scale = std::max(1.0, yty / std::max(1, n));
  }
};

std::vector<char> node_roles(const SolverContext& ctx, const NodeState& node) {
  std::vector<char> roles(ctx.p, kFree);
  for (int j : node.fixed_in) roles[j] = kFixedIn;
  for (int j : node.fixed_out) roles[j] = kFixedOut;
  return roles;
}

/// One cyclic coordinate-descent pass structure for the inner problem
///   min (1/n)||y - X b||^2 + sum_{j free} (mu/M_j)|b_j|,  |b_j| <= M_j.
/// Maintains h = X^T y - G b. Returns the certified suboptimality slack
/// (subgradient bound over the box), which is what the caller subtracts
/// from the dual value.
double run_coordinate_descent(const SolverContext& ctx,
                              const std::vector<char>& roles,
                              const std::vector<int>& active, double mu,
                              Eigen::VectorXd& beta, Eigen::VectorXd& h,
                              double tol_abs, int max_sweeps) {
  const Eigen::VectorXd& M = ctx.pb->big_m;
  const double n = static_cast<double>(ctx.n);

  auto kkt_slack = [&]() {
    double slack = 0.0;
    for (int j : active) {
      const double q = -2.0 / n * h[j];
      const double w = roles[j] == kFree ? mu / M[j] : 0.0;
      double g;
      if (beta[j] > 0.0) {
        g = q + w;
      } else if (beta[j] < 0.0) {
        g = q - w;
      } else {
        g = q + std::clamp(-q, -w, w);
      }
      slack += std::max(0.0, std::abs(g) * M[j] + g * beta[j]);
    }
    return slack;
  };

  double slack = kkt_slack();
  if (slack <= tol_abs) return slack;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_move = 0.0;
    for (int j : active) {
      const double d = ctx.diagG[j];
      if (d <= 0.0) {
        if (beta[j] != 0.0) {
          h += ctx.G.col(j) * beta[j];
          beta[j] = 0.0;
        }
        continue;
      }
      const double rho = h[j] + d * beta[j];
      double target;
      if (roles[j] == kFree && mu > 0.0) {
        const double thresh = 0.5 * n * mu / M[j];
        const double mag = std::abs(rho) - thresh;
        target = mag > 0.0 ? std::copysign(mag, rho) / d : 0.0;
      } else {
        target = rho / d;
      }
      target = std::clamp(target, -M[j], M[j]);
      const double delta = target - beta[j];
      if (delta != 0.0) {
        h -= ctx.G.col(j) * delta;
        beta[j] = target;
        max_move = std::max(max_move, std::abs(delta) * std::sqrt(d));
      }
    }
    slack = kkt_slack();
    if (slack <= tol_abs) break;
    if (max_move * max_move <= 1e-26 * ctx.scale) break;  // numerical floor
  }
  return slack;
}

RelaxationResult relax_node(const SolverContext& ctx, const NodeState& node,
                            double mu_tolerance, int mu_iterations) {
  const MiqpProblem& pb = *ctx.pb;
  const Eigen::VectorXd& M = pb.big_m;
  const int p = ctx.p;
  const double n = static_cast<double>(ctx.n);

  RelaxationResult res;
  const int budget = pb.k - static_cast<int>(node.fixed_in.size());
  if (budget < 0) {
    res.infeasible = true;
    res.lower_bound = kInf;
    return res;
  }

  std::vector<char> roles = node_roles(ctx, node);
  if (budget == 0) {
    // no room for free columns: the node support is exactly fixed_in
    for (int j = 0; j < p; ++j) {
      if (roles[j] == kFree) roles[j] = kFixedOut;
    }
  }
  std::vector<int> active;
  std::vector<int> free_cols;
  for (int j = 0; j < p; ++j) {
    if (roles[j] == kFixedOut) continue;
    active.push_back(j);
    if (roles[j] == kFree) free_cols.push_back(j);
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  if (node.relaxed_beta.size() == p) {
    beta = node.relaxed_beta;
    for (int j = 0; j < p; ++j) {
      if (roles[j] == kFixedOut) {
        beta[j] = 0.0;
      } else {
        beta[j] = std::clamp(beta[j], -M[j], M[j]);
      }
    }
  }
  Eigen::VectorXd h = ctx.Xty - ctx.G * beta;

  const double tol_abs = mu_tolerance * ctx.scale;
  const double safety = 1e-12 * ctx.scale;
  const int max_sweeps = 10 * std::max(1, p);

  double best_value = -kInf;
  double best_mu = 0.0;
  Eigen::VectorXd best_beta;
  double last_usage = 0.0;

  auto evaluate = [&](double mu) {
    const double slack = run_coordinate_descent(ctx, roles, active, mu, beta,
                                                h, tol_abs, max_sweeps);
    const double sse = ctx.yty - beta.dot(ctx.Xty + h);
    double usage = 0.0;
    for (int j : free_cols) usage += std::abs(beta[j]) / M[j];
    last_usage = usage;
    const double value =
        sse / n + mu * (usage - budget) - slack - safety;
    if (value > best_value) {
      best_value = value;
      best_mu = mu;
      best_beta = beta;
    }
    return value;
  };

  const bool budget_can_bind =
      budget > 0 && static_cast<int>(free_cols.size()) > budget;
  evaluate(0.0);
  if (budget_can_bind && last_usage > budget + 1e-9) {
    double mu_max = 0.0;
    for (int j : free_cols) {
      mu_max = std::max(mu_max, M[j] * 2.0 * std::abs(ctx.Xty[j]) / n);
    }
    if (mu_max > 0.0) {
      // golden-section ascent of the concave dual
      const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
      double a = 0.0, b = mu_max;
      double x1 = b - invphi * (b - a);
      double x2 = a + invphi * (b - a);
      double f1 = evaluate(x1);
      double f2 = evaluate(x2);
      for (int it = 0; it < mu_iterations; ++it) {
        if (f1 < f2) {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + invphi * (b - a);
          f2 = evaluate(x2);
        } else {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - invphi * (b - a);
          f1 = evaluate(x1);
        }
      }
    }
  }

  res.beta = best_beta;
  res.lower_bound = best_value;
  res.mu = best_mu;
  res.z_fraction = Eigen::VectorXd::Zero(p);
  for (int j : node.fixed_in) res.z_fraction[j] = 1.0;
  for (int j : free_cols) {
    res.z_fraction[j] = std::min(1.0, std::abs(best_beta[j]) / M[j]);
  }
  return res;
}

std::tuple<Eigen::VectorXi, Eigen::VectorXd, double> round_node(
    const SolverContext& ctx, const NodeState& node,
    const Eigen::VectorXd& relaxed_beta) {
  const MiqpProblem& pb = *ctx.pb;
  const int p = ctx.p;
  const int budget = pb.k - static_cast<int>(node.fixed_in.size());

  std::vector<char> roles = node_roles(ctx, node);
  std::vector<int> candidates;
  for (int j = 0; j < p; ++j) {
    if (roles[j] == kFree && relaxed_beta.size() == p &&
        relaxed_beta[j] != 0.0) {
      candidates.push_back(j);
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    return std::abs(relaxed_beta[a]) > std::abs(relaxed_beta[b]);
  });
  if (static_cast<int>(candidates.size()) > budget) {
    candidates.resize(std::max(0, budget));
  }

  std::vector<int> support = node.fixed_in;
  support.insert(support.end(), candidates.begin(), candidates.end());
  std::sort(support.begin(), support.end());

  Eigen::VectorXd beta =
      box_least_squares_on_support(pb.X, pb.y, support, pb.big_m);
  Eigen::VectorXi z = Eigen::VectorXi::Zero(p);
  for (int j : support) z[j] = 1;
  const double obj = (pb.y - pb.X * beta).squaredNorm() / ctx.n;
  return {z, beta, obj};
}

struct OpenNode {
  NodeState state;
  long seq = 0;
};

struct NodeOrder {
  // min lower bound first; deeper first on ties; then insertion order
  bool operator()(const OpenNode& a, const OpenNode& b) const {
    if (a.state.lower_bound != b.state.lower_bound) {
      return a.state.lower_bound > b.state.lower_bound;
    }
    if (a.state.depth != b.state.depth) return a.state.depth < b.state.depth;
    return a.seq > b.seq;
  }
};

double relative_gap(double ub, double lb) {
  if (!std::isfinite(lb)) return kInf;
  return std::max(0.0, (ub - lb) / std::max(ub, 1e-12));
}

}  // namespace

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::gap_reached: return "gap_reached";
    case SolveStatus::surrogate_reached: return "surrogate_reached";
    case SolveStatus::time_capped: return "time_capped";
    case SolveStatus::infeasible_k: return "infeasible_k";
  }
  return "unknown";
}

Eigen::VectorXd big_m_bounds(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             double c, std::vector<std::string>* warnings) {
  if (c <= 0.0) throw std::invalid_argument("big-M scale must be positive");
  const Eigen::VectorXd beta_hat = least_squares(X, y);
  Eigen::VectorXd bounds = c * beta_hat.cwiseAbs();
  const double largest = bounds.maxCoeff();
  if (largest <= 0.0) {
    if (warnings) {
      warnings->push_back("all-zero least-squares fit; big-M set to the floor");
    }
    bounds.setConstant(1e-6);
    return bounds;
  }
  const double floor = 1e-6 * largest;
  for (Eigen::Index j = 0; j < bounds.size(); ++j) {
    if (bounds[j] < floor) {
      if (warnings) {
        warnings->push_back("big-M floor raised for column " +
                            std::to_string(j));
      }
      bounds[j] = floor;
    }
  }
  return bounds;
}

RelaxationResult solve_node_relaxation(const MiqpProblem& problem,
                                       const NodeState& node,
                                       double mu_tolerance,
                                       int mu_iterations) {
  SolverContext ctx(problem);
  return relax_node(ctx, node, mu_tolerance, mu_iterations);
}

std::tuple<Eigen::VectorXi, Eigen::VectorXd, double> round_incumbent(
    const MiqpProblem& problem, const NodeState& node,
    const Eigen::VectorXd& relaxed_beta) {
  SolverContext ctx(problem);
  return round_node(ctx, node, relaxed_beta);
}

Solution solve(const MiqpProblem& problem, const MiqpOptions& options) {
  const int n = static_cast<int>(problem.X.rows());
  const int p = static_cast<int>(problem.X.cols());
  if (n < 1 || p < 1) throw std::invalid_argument("empty problem");
  if (problem.y.size() != n) throw std::invalid_argument("y length mismatch");
  if (problem.big_m.size() != p || problem.big_m.minCoeff() <= 0.0) {
    throw std::invalid_argument("big-M bounds must be positive, length p");
  }
  if (options.maxtime > options.totaltime) {
    throw std::invalid_argument("maxtime must not exceed totaltime");
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  Solution sol;
  sol.beta = Eigen::VectorXd::Zero(p);
  sol.z = Eigen::VectorXi::Zero(p);

  if (problem.k < 0) {
    sol.status = SolveStatus::infeasible_k;
    sol.objective = kInf;
    sol.lower_bound = kInf;
    sol.gap = 0.0;
    sol.wall_time = elapsed();
    return sol;
  }

  SolverContext ctx(problem);

  if (problem.k >= p) {
    std::vector<int> all(p);
    for (int j = 0; j < p; ++j) all[j] = j;
    sol.beta = box_least_squares_on_support(problem.X, problem.y, all,
                                            problem.big_m);
    for (int j = 0; j < p; ++j) sol.z[j] = sol.beta[j] != 0.0 ? 1 : 0;
    sol.objective = (problem.y - problem.X * sol.beta).squaredNorm() / n;
    sol.lower_bound = sol.objective;
    sol.gap = 0.0;
    sol.status = SolveStatus::optimal;
    sol.wall_time = elapsed();
    return sol;
  }

  // incumbent: the zero fit, improved by the warm start when one is given
  Eigen::VectorXd inc_beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXi inc_z = Eigen::VectorXi::Zero(p);
  double inc_obj = ctx.yty / n;
  if (options.warm_start && options.warm_start->size() == p) {
    const Eigen::VectorXd& ws = *options.warm_start;
    std::vector<int> support;
    for (int j = 0; j < p; ++j) {
      if (ws[j] != 0.0) support.push_back(j);
    }
    if (static_cast<int>(support.size()) > problem.k) {
      std::stable_sort(support.begin(), support.end(), [&](int a, int b) {
        return std::abs(ws[a]) > std::abs(ws[b]);
      });
      support.resize(problem.k);
      std::sort(support.begin(), support.end());
    }
    const Eigen::VectorXd beta =
        box_least_squares_on_support(problem.X, problem.y, support,
                                     problem.big_m);
    const double obj = (problem.y - problem.X * beta).squaredNorm() / n;
    if (obj < inc_obj) {
      inc_obj = obj;
      inc_beta = beta;
      for (int j : support) inc_z[j] = 1;
    }
  }

  std::mutex m;
  std::condition_variable cv;
  std::vector<OpenNode> heap;
  NodeOrder order;
  long next_seq = 0;
  long nodes = 0;
  const int workers = std::max(1, options.workers);
  std::vector<double> inflight(workers,
                               std::numeric_limits<double>::quiet_NaN());
  bool stop = false;
  SolveStatus status = SolveStatus::optimal;
  double final_lb = -kInf;
  double last_logged_lb = -kInf;
  std::vector<NodeAudit> audits;

  {
    OpenNode root;
    root.state.lower_bound = -kInf;
    if (options.warm_start && options.warm_start->size() == p) {
      root.state.relaxed_beta = *options.warm_start;
    }
    root.seq = next_seq++;
    heap.push_back(std::move(root));
  }

  auto log_event = [&](const char* event, double ub, double lb) {
    if (!options.event_log) return;
    char line[160];
    std::snprintf(line, sizeof(line), "%.3f %s %.10g %.10g %.6g\n", elapsed(),
                  event, ub, lb, relative_gap(ub, lb));
    (*options.event_log) << line;
  };

  // global lower bound over open and in-flight nodes; equals the incumbent
  // objective once the search space is exhausted
  auto global_lb = [&]() {
    double lb = kInf;
    for (const auto& node : heap) {
      lb = std::min(lb, node.state.lower_bound);
    }
    for (double v : inflight) {
      if (!std::isnan(v)) lb = std::min(lb, v);
    }
    if (lb == kInf) lb = inc_obj;
    return lb;
  };

  // returns true when a terminal status was decided (caller holds the lock)
  auto decide_stop = [&]() {
    const double lb = global_lb();
    const double ub = inc_obj;
    if (ub - lb <= 1e-9 * std::max(1.0, std::abs(ub))) {
      status = SolveStatus::optimal;
      final_lb = lb;
      return true;
    }
    if (options.eps_gap > 0.0 && relative_gap(ub, lb) <= options.eps_gap) {
      status = SolveStatus::gap_reached;
      final_lb = lb;
      return true;
    }
    if (options.surrogate_bound && elapsed() > options.maxtime) {
      const double s = *options.surrogate_bound;
      if ((ub - s) / std::max(s, 1e-12) <= options.eps_fs) {
        status = SolveStatus::surrogate_reached;
        final_lb = lb;
        return true;
      }
    }
    if (elapsed() > options.totaltime) {
      status = SolveStatus::time_capped;
      final_lb = lb;
      return true;
    }
    if (options.node_limit && nodes >= *options.node_limit) {
      status = SolveStatus::time_capped;
      final_lb = lb;
      return true;
    }
    return false;
  };

  auto worker_loop = [&](int wid) {
    std::unique_lock<std::mutex> lk(m);
    while (true) {
      if (stop) return;
      if (decide_stop()) {
        stop = true;
        cv.notify_all();
        return;
      }
      if (heap.empty()) {
        cv.wait_for(lk, std::chrono::milliseconds(10));
        continue;
      }
      std::pop_heap(heap.begin(), heap.end(), order);
      OpenNode node = std::move(heap.back());
      heap.pop_back();
      if (node.state.lower_bound >= inc_obj) continue;  // stale, prune

      {
        const double lb_now = std::min(node.state.lower_bound, global_lb());
        if (lb_now > last_logged_lb) {
          log_event("bound", inc_obj, lb_now);
          last_logged_lb = lb_now;
        }
      }
      inflight[wid] = node.state.lower_bound;
      ++nodes;
      lk.unlock();

      RelaxationResult res =
          relax_node(ctx, node.state, options.mu_tolerance,
                     options.mu_iterations);

      if (res.infeasible) {
        lk.lock();
        inflight[wid] = std::numeric_limits<double>::quiet_NaN();
        cv.notify_all();
        continue;
      }

      const double node_lb = std::max(node.state.lower_bound, res.lower_bound);
      auto [cand_z, cand_beta, cand_obj] =
          round_node(ctx, node.state, res.beta);

      // branching candidate: most fractional z, ties by |beta| then index
      const int budget = problem.k - static_cast<int>(node.state.fixed_in.size());
      int free_nonzero = 0;
      int branch_j = -1;
      double branch_frac = -1.0;
      double branch_mag = -1.0;
      {
        std::vector<char> roles = node_roles(ctx, node.state);
        for (int j = 0; j < p; ++j) {
          if (roles[j] != kFree) continue;
          const double mag = std::abs(res.beta[j]);
          if (mag <= 1e-10 * problem.big_m[j]) continue;
          ++free_nonzero;
          const double zj = res.z_fraction[j];
          const double frac = std::min(zj, 1.0 - zj);
          if (frac > branch_frac ||
              (frac == branch_frac && mag > branch_mag)) {
            branch_frac = frac;
            branch_mag = mag;
            branch_j = j;
          }
        }
      }

      lk.lock();
      if (options.audit_nodes) {
        audits.push_back({node.state.fixed_in, node.state.fixed_out, node_lb});
      }
      if (cand_obj < inc_obj) {
        inc_obj = cand_obj;
        inc_beta = cand_beta;
        inc_z = cand_z;
        log_event("incumbent", inc_obj, global_lb());
      }
      const bool solved_exactly =
          free_nonzero <= budget &&
          (branch_j < 0 ||
           cand_obj - node_lb <= 1e-9 * std::max(1.0, std::abs(cand_obj)));
      if (node_lb < inc_obj && !solved_exactly && branch_j >= 0) {
        const bool cache = heap.size() < 10000;
        OpenNode out_child;
        out_child.state.fixed_in = node.state.fixed_in;
        out_child.state.fixed_out = node.state.fixed_out;
        out_child.state.fixed_out.insert(
            std::lower_bound(out_child.state.fixed_out.begin(),
                             out_child.state.fixed_out.end(), branch_j),
            branch_j);
        out_child.state.lower_bound = node_lb;
        out_child.state.depth = node.state.depth + 1;
        if (cache) {
          out_child.state.relaxed_beta = res.beta;
          out_child.state.relaxed_beta[branch_j] = 0.0;
        }
        out_child.seq = next_seq++;

        OpenNode in_child;
        in_child.state.fixed_in = node.state.fixed_in;
        in_child.state.fixed_in.insert(
            std::lower_bound(in_child.state.fixed_in.begin(),
                             in_child.state.fixed_in.end(), branch_j),
            branch_j);
        in_child.state.fixed_out = node.state.fixed_out;
        in_child.state.lower_bound = node_lb;
        in_child.state.depth = node.state.depth + 1;
        if (cache) in_child.state.relaxed_beta = res.beta;
        in_child.seq = next_seq++;

        if (out_child.state.lower_bound < inc_obj) {
          heap.push_back(std::move(out_child));
          std::push_heap(heap.begin(), heap.end(), order);
        }
        if (in_child.state.lower_bound < inc_obj) {
          heap.push_back(std::move(in_child));
          std::push_heap(heap.begin(), heap.end(), order);
        }
      }
      inflight[wid] = std::numeric_limits<double>::quiet_NaN();
      cv.notify_all();
    }
  };

  if (workers == 1) {
    worker_loop(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back(worker_loop, w);
    }
    for (auto& t : pool) t.join();
  }

  sol.beta = inc_beta;
  sol.z = inc_z;
  sol.objective = inc_obj;
  sol.lower_bound = std::min(final_lb, inc_obj);
  sol.gap = relative_gap(sol.objective, sol.lower_bound);
  sol.status = status;
  sol.nodes = nodes;
  sol.wall_time = elapsed();
  sol.audited_nodes = std::move(audits);
  log_event(to_string(status), sol.objective, sol.lower_bound);
  return sol;
}

}  // namespace mipboost
