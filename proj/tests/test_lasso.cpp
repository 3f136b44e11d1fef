#include <doctest.h>

#include <random>

#include "mipboost/lasso.hpp"
#include "mipboost/least_squares.hpp"
#include "mipboost/scenario.hpp"
#include "oracles.hpp"

using namespace mipboost;

namespace {

double soft(double x, double t) {
  const double m = std::abs(x) - t;
  return m > 0 ? std::copysign(m, x) : 0.0;
}

Dataset standardized_instance(int n, int p, int k0, double snr,
                              std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.n = n;
  cfg.p = p;
  cfg.k0 = k0;
  cfg.snr = snr;
  cfg.seed = seed;
  cfg.beta_pattern = parse_beta_pattern("1x" + std::to_string(k0), p);
  auto [d, truth] = generate_scenario(cfg);
  return standardize(d).first;
}

// orthonormal columns: X^T X = I (n >= p)
Eigen::MatrixXd orthonormal_design(int n, int p, std::uint64_t seed) {
  const Eigen::MatrixXd Q = oracles::random_orthogonal(n, seed);
  return Q.leftCols(p);
}

}  // namespace

TEST_SUITE("lasso") {

TEST_CASE("lambda grid endpoints and spacing") {
  Eigen::MatrixXd X(2, 2);
  X << 1, 0, 0, 1;
  Eigen::VectorXd y(2);
  y << 1.8, -0.8;
  // X^T y / n = (0.9, -0.4)
  const Eigen::VectorXd grid = lambda_path(X, y, 3, 0.01);
  CHECK(grid[0] == doctest::Approx(0.9));
  CHECK(grid[1] == doctest::Approx(0.09).epsilon(1e-12));
  CHECK(grid[2] == doctest::Approx(0.009).epsilon(1e-12));

  const Eigen::VectorXd beta =
      coordinate_descent(X, y, grid[0], Eigen::VectorXd());
  CHECK(beta.norm() == 0.0);
}

TEST_CASE("single-feature soft threshold") {
  const int n = 10;
  Eigen::MatrixXd X(n, 1);
  X.setOnes();
  Eigen::VectorXd y = 0.8 * X.col(0);  // x^T y / n = 0.8
  const Eigen::VectorXd beta =
      coordinate_descent(X, y, 0.3, Eigen::VectorXd());
  CHECK(beta[0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("orthonormal-design path matches the closed form") {
  const int n = 40, p = 6;
  const Eigen::MatrixXd X = orthonormal_design(n, p, 7);
  Eigen::VectorXd y = Eigen::VectorXd::Random(n);
  const Eigen::VectorXd corr = X.transpose() * y / n;  // closed-form driver
  const Eigen::VectorXd grid = lambda_path(X, y, 30, 1e-3);
  const LassoPath path = fit_lasso_path(X, y, grid);
  for (int i = 0; i < grid.size(); ++i) {
    for (int j = 0; j < p; ++j) {
      // with X^T X = I, the solution is S(x_j^T y / n, lambda) * n
      const double expect = soft(corr[j], grid[i]) * n;
      CHECK(path.betas[i][j] == doctest::Approx(expect).epsilon(1e-10));
    }
  }
}

TEST_CASE("KKT certificate on random instances") {
  const Dataset d = standardized_instance(40, 6, 2, 2.0, 5);
  const Eigen::VectorXd grid = lambda_path(d.X, d.y, 50, 1e-3);
  const LassoPath path = fit_lasso_path(d.X, d.y, grid);
  for (int i = 0; i < grid.size(); ++i) {
    CHECK(lasso_kkt_residual(d.X, d.y, grid[i], path.betas[i]) <= 1e-6);
  }
}

TEST_CASE("objective matches a projected-subgradient oracle") {
  const Dataset d = standardized_instance(40, 6, 2, 1.0, 9);
  const double lambda = lambda_path(d.X, d.y, 10, 0.05)[4];
  const Eigen::VectorXd beta =
      coordinate_descent(d.X, d.y, lambda, Eigen::VectorXd());
  const double n = static_cast<double>(d.n());
  const double obj = (d.y - d.X * beta).squaredNorm() / (2.0 * n) +
                     lambda * beta.lpNorm<1>();
  const double oracle =
      oracles::subgradient_lasso_objective(d.X, d.y, lambda, 100000);
  CHECK(obj <= oracle + 1e-6);
  CHECK(obj == doctest::Approx(oracle).epsilon(1e-4));
}

TEST_CASE("objective is nonincreasing across sweeps") {
  const Dataset d = standardized_instance(50, 8, 3, 1.0, 13);
  const double lambda = lambda_path(d.X, d.y, 10, 0.01)[6];
  CdDiagnostics diag;
  coordinate_descent(d.X, d.y, lambda, Eigen::VectorXd(), &diag);
  REQUIRE(diag.sweeps >= 1);
  for (std::size_t s = 1; s < diag.sweep_objectives.size(); ++s) {
    CHECK(diag.sweep_objectives[s] <= diag.sweep_objectives[s - 1] + 1e-12);
  }
}

TEST_CASE("cv_lasso selects a screening support at high signal") {
  ScenarioConfig cfg;
  cfg.n = 100;
  cfg.p = 12;
  cfg.k0 = 3;
  cfg.snr = 1e6;
  cfg.seed = 3;
  cfg.beta_pattern = parse_beta_pattern("1x3", cfg.p);
  auto [raw, truth] = generate_scenario(cfg);
  const Dataset d = standardize(raw).first;
  const FoldAssignment folds = make_folds(100, 10, 4);
  const Eigen::VectorXd grid = lambda_path(d.X, d.y);
  const LassoCv cv = cv_lasso(d, folds, grid);

  const LassoPath path = fit_lasso_path(d.X, d.y, grid);
  std::vector<int> support;
  for (int j = 0; j < cfg.p; ++j) {
    if (path.betas[cv.index_min][j] != 0.0) support.push_back(j);
  }
  for (int j : truth.active_set) {
    CHECK(std::find(support.begin(), support.end(), j) != support.end());
  }
  CHECK(cv.lambda_1sd >= cv.lambda_min);
}

TEST_CASE("flat curve pushes the 1-SD rule to the largest lambda") {
  LassoCv cv;  // exercise the rule directly through cv_lasso internals:
  // a dataset with pure noise gives an early plateau; check the invariant
  ScenarioConfig cfg;
  cfg.n = 60;
  cfg.p = 5;
  cfg.k0 = 1;
  cfg.snr = 1e-6;  // essentially noise
  cfg.seed = 8;
  cfg.beta_pattern = parse_beta_pattern("1x1", cfg.p);
  auto [raw, truth] = generate_scenario(cfg);
  const Dataset d = standardize(raw).first;
  const FoldAssignment folds = make_folds(60, 5, 2);
  const Eigen::VectorXd grid = lambda_path(d.X, d.y, 40);
  const LassoCv out = cv_lasso(d, folds, grid);
  CHECK(out.lambda_1sd >= out.lambda_min);
  // the 1sd rule lands within one SD of the minimum
  CHECK(out.cvmse[out.index_1sd] <=
        out.cvmse[out.index_min] + out.fold_sd[out.index_min] + 1e-12);
}

TEST_CASE("relaxed refit") {
  const Dataset d = standardized_instance(30, 5, 2, 5.0, 21);

  SUBCASE("full support equals OLS") {
    const Eigen::VectorXd beta = relaxed_refit(d.X, d.y, {0, 1, 2, 3, 4});
    const Eigen::VectorXd ols = oracles::naive_ls(d.X, d.y);
    CHECK((beta - ols).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("orthonormal design singleton") {
    const Eigen::MatrixXd X = orthonormal_design(20, 4, 10);
    Eigen::VectorXd y = Eigen::VectorXd::Random(20);
    const Eigen::VectorXd beta = relaxed_refit(X, y, {2});
    CHECK(beta[2] == doctest::Approx(X.col(2).dot(y)).epsilon(1e-12));
    CHECK(beta[0] == 0.0);
  }
  SUBCASE("refit never increases the in-sample MSE of the lasso fit") {
    const Eigen::VectorXd grid = lambda_path(d.X, d.y, 20, 0.01);
    const LassoPath path = fit_lasso_path(d.X, d.y, grid);
    const Eigen::VectorXd& lasso_beta = path.betas[10];
    std::vector<int> support;
    for (int j = 0; j < 5; ++j) {
      if (lasso_beta[j] != 0.0) support.push_back(j);
    }
    if (!support.empty()) {
      const Eigen::VectorXd refit = relaxed_refit(d.X, d.y, support);
      CHECK(oracles::mse(d.X, d.y, refit) <=
            oracles::mse(d.X, d.y, lasso_beta) + 1e-12);
    }
  }
  SUBCASE("empty support is rejected") {
    CHECK_THROWS_AS(relaxed_refit(d.X, d.y, {}), std::invalid_argument);
  }
}

TEST_CASE("grid validation") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(10, 3);
  Eigen::VectorXd y = Eigen::VectorXd::Random(10);
  CHECK_THROWS_AS(lambda_path(X, y, 1), std::invalid_argument);
  CHECK_THROWS_AS(lambda_path(X, y, 10, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(lambda_path(X, Eigen::VectorXd::Zero(10)),
                  std::invalid_argument);
  Eigen::VectorXd ascending(2);
  ascending << 0.1, 0.2;
  CHECK_THROWS_AS(fit_lasso_path(X, y, ascending), std::invalid_argument);
}

}  // TEST_SUITE
