#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace mipboost {

/// Best-subset instance: minimize (1/n)||y - X beta||^2 subject to
/// |beta_j| <= M_j z_j, sum z_j <= k, z binary.
struct MiqpProblem {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  int k = 0;
  Eigen::VectorXd big_m;  // strictly positive, length p
};

struct MiqpOptions {
  double eps_gap = 0.0;  // relative optimality gap target
  double eps_fs = 0.0;   // surrogate gap target
  double maxtime = std::numeric_limits<double>::infinity();    // seconds;
                                                               // surrogate rule
                                                               // activates after
  double totaltime = std::numeric_limits<double>::infinity();  // hard wall cap
  std::optional<double> surrogate_bound;           // reference error bound
  std::optional<Eigen::VectorXd> warm_start;       // coefficients; z implied
  std::optional<long> node_limit;
  int workers = 1;
  double mu_tolerance = 1e-8;  // inner coordinate-descent KKT tolerance
  int mu_iterations = 20;      // golden-section steps for the dual multiplier
  std::ostream* event_log = nullptr;  // columns: time_s event ub lb gap
  bool audit_nodes = false;           // record every explored node's bound
};

enum class SolveStatus {
  optimal,
  gap_reached,
  surrogate_reached,
  time_capped,
  infeasible_k,
};

const char* to_string(SolveStatus status);

/// Branch-and-bound search state: columns fixed into / out of the support
/// plus the best certified bound known for the subtree.
struct NodeState {
  std::vector<int> fixed_in;   // sorted
  std::vector<int> fixed_out;  // sorted
  double lower_bound = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd relaxed_beta;  // optional warm-start cache; empty = absent
  int depth = 0;
};

struct RelaxationResult {
  Eigen::VectorXd beta;
  double lower_bound = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd z_fraction;  // |beta_j|/M_j on free columns, 1 on fixed_in
  double mu = 0.0;             // budget multiplier at the returned bound
  bool infeasible = false;     // k - |fixed_in| < 0
};

struct NodeAudit {
  std::vector<int> fixed_in;
  std::vector<int> fixed_out;
  double lower_bound = 0.0;
};

struct Solution {
  Eigen::VectorXd beta;
  Eigen::VectorXi z;
  double objective = std::numeric_limits<double>::infinity();
  double lower_bound = -std::numeric_limits<double>::infinity();
  double gap = 0.0;
  SolveStatus status = SolveStatus::optimal;
  long nodes = 0;
  double wall_time = 0.0;
  std::vector<NodeAudit> audited_nodes;  // filled when options.audit_nodes
};

/// Per-coefficient box bounds M_j = c |beta_hat_j| from the (minimum-norm)
/// least-squares fit, floored at 1e-6 times the largest bound so no feature
/// is excluded outright by a near-zero estimate.
Eigen::VectorXd big_m_bounds(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             double c,
                             std::vector<std::string>* warnings = nullptr);

/// Convex node relaxation: z in [0,1] eliminated through z_j = |beta_j|/M_j,
/// leaving box-constrained least squares under the budget
/// sum |beta_j|/M_j <= k - |fixed_in|. Solved through the Lagrangian dual of
/// the budget constraint; the returned bound is certified for any mu >= 0 by
/// weak duality, with the inner coordinate-descent slack subtracted.
RelaxationResult solve_node_relaxation(const MiqpProblem& problem,
                                       const NodeState& node,
                                       double mu_tolerance = 1e-8,
                                       int mu_iterations = 20);

/// Primal heuristic: keep fixed_in plus the largest free |beta_j| up to the
/// sparsity budget, refit by least squares on that support, and repair any
/// box violation. Always returns a feasible point.
std::tuple<Eigen::VectorXi, Eigen::VectorXd, double> round_incumbent(
    const MiqpProblem& problem, const NodeState& node,
    const Eigen::VectorXd& relaxed_beta);

/// Best-first branch and bound over the selection indicators.
Solution solve(const MiqpProblem& problem, const MiqpOptions& options);

}  // namespace mipboost
