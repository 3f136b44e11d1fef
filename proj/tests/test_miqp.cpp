#include <doctest.h>

#include <random>
#include <sstream>

#include "mipboost/forward_selection.hpp"
#include "mipboost/miqp.hpp"
#include "oracles.hpp"

using namespace mipboost;

namespace {

MiqpProblem identity_problem(const Eigen::VectorXd& y, int k, double m) {
  MiqpProblem pb;
  const int n = static_cast<int>(y.size());
  pb.X = Eigen::MatrixXd::Identity(n, n);
  pb.y = y;
  pb.k = k;
  pb.big_m = Eigen::VectorXd::Constant(n, m);
  return pb;
}

MiqpProblem random_problem(int n, int p, int k, double noise,
                           std::uint64_t seed) {
  const auto inst = oracles::random_instance(n, p, std::min(k, p), noise, seed);
  MiqpProblem pb;
  pb.X = inst.X;
  pb.y = inst.y;
  pb.k = k;
  pb.big_m = big_m_bounds(inst.X, inst.y, 5.0);
  return pb;
}

std::vector<int> support_of(const Eigen::VectorXi& z) {
  std::vector<int> s;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    if (z[j] != 0) s.push_back(static_cast<int>(j));
  }
  return s;
}

void check_feasible(const MiqpProblem& pb, const Solution& sol) {
  int count = 0;
  for (Eigen::Index j = 0; j < sol.z.size(); ++j) {
    if (sol.z[j] == 0) {
      CHECK(sol.beta[j] == 0.0);
    } else {
      ++count;
    }
    CHECK(std::abs(sol.beta[j]) <= pb.big_m[j] * sol.z[j] + 1e-12);
  }
  CHECK(count <= pb.k);
  CHECK(sol.gap >= 0.0);
}

}  // namespace

TEST_SUITE("miqp") {

TEST_CASE("big_m_bounds from the least-squares fit") {
  SUBCASE("forced arithmetic on an identity design") {
    Eigen::VectorXd y(3);
    y << 2, -1, 0.5;
    const Eigen::VectorXd m =
        big_m_bounds(Eigen::MatrixXd::Identity(3, 3), y, 5.0);
    CHECK(m[0] == doctest::Approx(10.0));
    CHECK(m[1] == doctest::Approx(5.0));
    CHECK(m[2] == doctest::Approx(2.5));
  }
  SUBCASE("orthonormal design uses x_j^T y") {
    const Eigen::MatrixXd Q = oracles::random_orthogonal(10, 5).leftCols(4);
    Eigen::VectorXd y = Eigen::VectorXd::Random(10);
    const Eigen::VectorXd m = big_m_bounds(Q, y, 2.0);
    for (int j = 0; j < 4; ++j) {
      const double expect = 2.0 * std::abs(Q.col(j).dot(y));
      if (expect > 1e-6 * m.maxCoeff()) {
        CHECK(m[j] == doctest::Approx(expect).epsilon(1e-10));
      }
    }
  }
  SUBCASE("undersampled case stays finite via the minimum-norm fit") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd X(8, 20);
    for (int j = 0; j < 20; ++j) {
      for (int i = 0; i < 8; ++i) X(i, j) = normal(rng);
    }
    Eigen::VectorXd y = Eigen::VectorXd::Random(8);
    const Eigen::VectorXd m = big_m_bounds(X, y, 5.0);
    CHECK(m.allFinite());
    CHECK(m.minCoeff() > 0.0);
    // min-norm solution through the row normal equations
    const Eigen::VectorXd beta_mn =
        X.transpose() *
        (X * X.transpose()).ldlt().solve(y);
    for (int j = 0; j < 20; ++j) {
      const double expect =
          std::max(5.0 * std::abs(beta_mn[j]), 1e-6 * m.maxCoeff());
      CHECK(m[j] == doctest::Approx(expect).epsilon(1e-6));
    }
  }
  SUBCASE("all-zero response hits the floor with a warning") {
    std::vector<std::string> warnings;
    const Eigen::VectorXd m = big_m_bounds(Eigen::MatrixXd::Identity(3, 3),
                                           Eigen::VectorXd::Zero(3), 5.0,
                                           &warnings);
    CHECK(m.minCoeff() > 0.0);
    CHECK(!warnings.empty());
  }
}

TEST_CASE("node relaxation on the identity design") {
  Eigen::VectorXd y(2);
  y << 2, 1;

  SUBCASE("inactive budget constraint") {
    const MiqpProblem pb = identity_problem(y, 1, 10.0);
    NodeState root;
    const RelaxationResult res = solve_node_relaxation(pb, root);
    CHECK(res.beta[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(res.beta[1] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(res.lower_bound == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(res.z_fraction[0] == doctest::Approx(0.2).epsilon(1e-6));
    CHECK(res.z_fraction[1] == doctest::Approx(0.1).epsilon(1e-6));
  }
  SUBCASE("binding budget gives the L1-ball projection") {
    const MiqpProblem pb = identity_problem(y, 1, 1.0);
    NodeState root;
    const RelaxationResult res = solve_node_relaxation(pb, root);
    // projection of (2,1) onto the unit L1 ball with unit boxes: (1, 0)
    CHECK(res.lower_bound == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(res.lower_bound <= 1.0 + 1e-9);  // certified: never above the truth
    CHECK(res.beta[0] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(std::abs(res.beta[1]) < 1e-3);
  }
  SUBCASE("zero budget returns the null bound") {
    const MiqpProblem pb = identity_problem(y, 0, 10.0);
    NodeState root;
    const RelaxationResult res = solve_node_relaxation(pb, root);
    CHECK(res.beta.cwiseAbs().maxCoeff() == 0.0);
    CHECK(res.lower_bound ==
          doctest::Approx(y.squaredNorm() / 2.0).epsilon(1e-9));
  }
  SUBCASE("overfull fixed_in set is infeasible") {
    const MiqpProblem pb = identity_problem(y, 1, 10.0);
    NodeState node;
    node.fixed_in = {0, 1};
    const RelaxationResult res = solve_node_relaxation(pb, node);
    CHECK(res.infeasible);
  }
}

TEST_CASE("round_incumbent") {
  Eigen::VectorXd y(2);
  y << 2, 1;
  const MiqpProblem pb = identity_problem(y, 1, 10.0);
  NodeState root;

  SUBCASE("top-|beta| support with exact refit") {
    Eigen::VectorXd relaxed(2);
    relaxed << 2, 1;
    auto [z, beta, obj] = round_incumbent(pb, root, relaxed);
    CHECK(z[0] == 1);
    CHECK(z[1] == 0);
    CHECK(beta[0] == doctest::Approx(2.0));
    CHECK(beta[1] == 0.0);
    CHECK(obj == doctest::Approx(0.5));
  }
  SUBCASE("integral relaxation is a fixed point") {
    Eigen::VectorXd relaxed(2);
    relaxed << 2, 0;
    auto [z, beta, obj] = round_incumbent(pb, root, relaxed);
    CHECK(obj == doctest::Approx(0.5));
  }
  SUBCASE("never beats exhaustive enumeration") {
    for (std::uint64_t seed : {31, 32, 33}) {
      const MiqpProblem rp = random_problem(30, 8, 3, 0.7, seed);
      NodeState node;
      const RelaxationResult res = solve_node_relaxation(rp, node);
      auto [z, beta, obj] = round_incumbent(rp, node, res.beta);
      const auto best = oracles::enumerate_best_subset(rp.X, rp.y, rp.k);
      CHECK(obj >= best.objective - 1e-9);
    }
  }
}

TEST_CASE("solve on orthogonal toy instances") {
  Eigen::VectorXd y(3);
  y << 3, 1, 2;
  MiqpOptions opt;

  SUBCASE("k = 1 picks the largest response") {
    const MiqpProblem pb = identity_problem(y, 1, 10.0);
    const Solution sol = solve(pb, opt);
    CHECK(sol.status == SolveStatus::optimal);
    CHECK(support_of(sol.z) == std::vector<int>{0});
    CHECK(sol.objective == doctest::Approx(5.0 / 3.0));
    check_feasible(pb, sol);
  }
  SUBCASE("k = 2 keeps the two largest") {
    const MiqpProblem pb = identity_problem(y, 2, 10.0);
    const Solution sol = solve(pb, opt);
    CHECK(support_of(sol.z) == std::vector<int>{0, 2});
    CHECK(sol.objective == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("k = 0 returns the null model") {
    const MiqpProblem pb = identity_problem(y, 0, 10.0);
    const Solution sol = solve(pb, opt);
    CHECK(sol.objective == doctest::Approx(y.squaredNorm() / 3.0));
    CHECK(sol.status == SolveStatus::optimal);
  }
  SUBCASE("k < 0 is infeasible") {
    const MiqpProblem pb = identity_problem(y, -1, 10.0);
    const Solution sol = solve(pb, opt);
    CHECK(sol.status == SolveStatus::infeasible_k);
  }
  SUBCASE("k >= p returns the full least-squares fit") {
    const MiqpProblem pb = identity_problem(y, 3, 10.0);
    const Solution sol = solve(pb, opt);
    CHECK(sol.objective == doctest::Approx(0.0));
    CHECK(sol.nodes == 0);
  }
}

TEST_CASE("solve matches exhaustive enumeration on random instances") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 12; ++trial) {
    const int p = 6 + static_cast<int>(rng() % 7);   // 6..12
    const int k = 1 + static_cast<int>(rng() % 5);   // 1..5
    const double noise = 0.3 + 0.2 * (trial % 3);
    const MiqpProblem pb = random_problem(30, p, k, noise, 9000 + trial);
    MiqpOptions opt;  // eps_gap = 0, no caps
    const Solution sol = solve(pb, opt);
    const auto best =
        oracles::enumerate_best_subset(pb.X, pb.y, pb.k, {}, {}, pb.big_m);
    CHECK(sol.objective == doctest::Approx(best.objective).epsilon(1e-8));
    CHECK(sol.status == SolveStatus::optimal);
    check_feasible(pb, sol);
    if (best.runner_up - best.objective > 1e-6) {
      CHECK(support_of(sol.z) == best.support);
    }
  }
}

TEST_CASE("explored node bounds are certified") {
  for (std::uint64_t seed : {71, 72, 73}) {
    const MiqpProblem pb = random_problem(25, 9, 3, 0.8, seed);
    MiqpOptions opt;
    opt.audit_nodes = true;
    const Solution sol = solve(pb, opt);
    REQUIRE(!sol.audited_nodes.empty());
    for (const auto& audit : sol.audited_nodes) {
      const auto best = oracles::enumerate_best_subset(
          pb.X, pb.y, pb.k, audit.fixed_in, audit.fixed_out, pb.big_m);
      CHECK(audit.lower_bound <= best.objective + 1e-12);
    }
  }
}

TEST_CASE("warm starts initialize the incumbent") {
  const MiqpProblem base = random_problem(30, 10, 3, 0.6, 404);
  auto [z_fs, beta_fs] = fs_warm_start(base.X, base.y, 3);
  const double fs_obj = (base.y - base.X * beta_fs).squaredNorm() / 30.0;

  MiqpOptions opt;
  opt.warm_start = beta_fs;
  const Solution sol = solve(base, opt);
  CHECK(sol.objective <= fs_obj + 1e-12);

  SUBCASE("warm start reduces the node count") {
    MiqpOptions cold;
    const Solution cold_sol = solve(base, cold);
    CHECK(sol.objective == doctest::Approx(cold_sol.objective).epsilon(1e-9));
    CHECK(sol.nodes <= cold_sol.nodes);
  }
}

TEST_CASE("termination statuses") {
  const MiqpProblem pb = random_problem(40, 12, 4, 1.0, 515);

  SUBCASE("gap_reached with a loose tolerance") {
    MiqpOptions opt;
    opt.eps_gap = 0.9;
    const Solution sol = solve(pb, opt);
    CHECK((sol.status == SolveStatus::gap_reached ||
           sol.status == SolveStatus::optimal));
    CHECK(sol.gap <= 0.9 + 1e-12);
  }
  SUBCASE("surrogate_reached fires immediately at maxtime zero") {
    MiqpOptions opt;
    opt.maxtime = 0.0;
    opt.totaltime = 60.0;
    opt.eps_fs = 0.05;
    // a surrogate far above anything achievable triggers at once
    opt.surrogate_bound = 1e6;
    const Solution sol = solve(pb, opt);
    CHECK(sol.status == SolveStatus::surrogate_reached);
  }
  SUBCASE("time_capped returns an honest incumbent") {
    MiqpOptions opt;
    opt.totaltime = 0.0;
    opt.maxtime = 0.0;
    const Solution sol = solve(pb, opt);
    CHECK(sol.status == SolveStatus::time_capped);
    CHECK(std::isfinite(sol.objective));
    CHECK(sol.gap >= 0.0);
    check_feasible(pb, sol);
  }
  SUBCASE("node_limit maps to time_capped") {
    MiqpOptions opt;
    opt.node_limit = 1;
    const Solution sol = solve(pb, opt);
    CHECK((sol.status == SolveStatus::time_capped ||
           sol.status == SolveStatus::optimal));
  }
}

TEST_CASE("determinism with one worker") {
  const MiqpProblem pb = random_problem(30, 10, 3, 0.8, 616);
  MiqpOptions opt;
  const Solution a = solve(pb, opt);
  const Solution b = solve(pb, opt);
  CHECK(a.objective == b.objective);
  CHECK(a.lower_bound == b.lower_bound);
  CHECK(a.nodes == b.nodes);
  CHECK(support_of(a.z) == support_of(b.z));
  CHECK((a.beta - b.beta).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("multi-worker solves agree within the gap tolerance") {
  const MiqpProblem pb = random_problem(30, 11, 4, 0.8, 717);
  MiqpOptions opt;
  const Solution single = solve(pb, opt);
  MiqpOptions multi = opt;
  multi.workers = 4;
  const Solution par = solve(pb, multi);
  CHECK(par.objective == doctest::Approx(single.objective).epsilon(1e-8));
  check_feasible(pb, par);
}

TEST_CASE("event log records improvements") {
  std::ostringstream log;
  MiqpOptions opt;
  opt.event_log = &log;
  const MiqpProblem pb = random_problem(30, 10, 3, 0.8, 818);
  solve(pb, opt);
  const std::string text = log.str();
  CHECK(text.find("incumbent") != std::string::npos);
  CHECK(text.find("optimal") != std::string::npos);
}

TEST_CASE("incumbent improves monotonically in the event log") {
  std::ostringstream log;
  MiqpOptions opt;
  opt.event_log = &log;
  const MiqpProblem pb = random_problem(35, 12, 4, 1.2, 919);
  solve(pb, opt);
  std::istringstream in(log.str());
  std::string line;
  double last_ub = std::numeric_limits<double>::infinity();
  double last_lb = -std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    double t, ub, lb, gap;
    std::string event;
    fields >> t >> event >> ub >> lb >> gap;
    if (event == "incumbent") {
      CHECK(ub <= last_ub + 1e-12);
      last_ub = ub;
    }
    if (event == "bound" && std::isfinite(lb)) {
      CHECK(lb >= last_lb - 1e-12);
      last_lb = lb;
    }
  }
}

}  // TEST_SUITE
