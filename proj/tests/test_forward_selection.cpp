#include <doctest.h>

#include "mipboost/forward_selection.hpp"
#include "oracles.hpp"

using namespace mipboost;

TEST_SUITE("forward_selection") {

TEST_CASE("orthogonal design orders by |y_j|") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Identity(3, 3);
  Eigen::VectorXd y(3);
  y << 3, 1, 2;
  const FsPath path = fs_path(X, y, 2);
  CHECK(path.selection_order == std::vector<int>{0, 2});
  CHECK(path.sse[0] == doctest::Approx(5.0));  // 1^2 + 2^2
  CHECK(path.sse[1] == doctest::Approx(1.0));
  CHECK(path.coefficients[0][0] == doctest::Approx(3.0));
  CHECK(path.coefficients[1][2] == doctest::Approx(2.0));
}

TEST_CASE("perfect single-feature fit is found first") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(20, 6);
  Eigen::VectorXd y = 2.0 * X.col(3);
  const FsPath path = fs_path(X, y, 2);
  CHECK(path.selection_order[0] == 3);
  CHECK(path.sse[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(path.coefficients[0][3] == doctest::Approx(2.0));
}

TEST_CASE("path matches the naive greedy oracle") {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const auto inst = oracles::random_instance(30, 8, 3, 0.5, seed);
    const FsPath path = fs_path(inst.X, inst.y, 8);
    const auto naive = oracles::naive_forward_selection(inst.X, inst.y, 8);
    REQUIRE(path.kmax() == 8);
    for (int k = 0; k < 8; ++k) {
      CHECK(path.selection_order[k] == naive[k].chosen);
      CHECK(path.sse[k] == doctest::Approx(naive[k].sse).epsilon(1e-9));
    }
  }
}

TEST_CASE("nesting and monotone SSE") {
  const auto inst = oracles::random_instance(40, 10, 4, 1.0, 99);
  const FsPath path = fs_path(inst.X, inst.y, 10);
  for (int k = 1; k < path.kmax(); ++k) {
    CHECK(path.sse[k] <= path.sse[k - 1] + 1e-12);
    for (int j : path.supports[k - 1]) {
      const auto& next = path.supports[k];
      CHECK(std::find(next.begin(), next.end(), j) != next.end());
    }
  }
  CHECK(path.sse[0] <= path.sse0);
}

TEST_CASE("zero columns are never selected unless forced") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(15, 4);
  X.col(2).setZero();
  Eigen::VectorXd y = X.col(0) - X.col(3);
  const FsPath path = fs_path(X, y, 4);
  CHECK(path.selection_order[3] == 2);  // dead column forced last
  CHECK(path.sse[3] == doctest::Approx(path.sse[2]));
}

TEST_CASE("warm start extraction") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Identity(3, 3);
  Eigen::VectorXd y(3);
  y << 3, 1, 2;
  const FsPath path = fs_path(X, y, 2);

  SUBCASE("k = 2 on the orthogonal example") {
    auto [z, beta] = fs_warm_start(path, 2);
    CHECK(z.sum() == 2);
    CHECK(z[0] == 1);
    CHECK(z[2] == 1);
    CHECK(beta[0] == doctest::Approx(3.0));
    CHECK(beta[1] == 0.0);
    CHECK(beta[2] == doctest::Approx(2.0));
  }
  SUBCASE("k = 0 gives the null model") {
    auto [z, beta] = fs_warm_start(path, 0);
    CHECK(z.sum() == 0);
    CHECK(beta.norm() == 0.0);
  }
}

TEST_CASE("warm-start objective equals the path SSE") {
  const auto inst = oracles::random_instance(30, 8, 3, 0.4, 21);
  const FsPath path = fs_path(inst.X, inst.y, 4);
  auto [z, beta] = fs_warm_start(path, 3);
  const double obj = (inst.y - inst.X * beta).squaredNorm();
  CHECK(obj == doctest::Approx(path.sse[2]).epsilon(1e-12));
}

TEST_CASE("surrogate bound values") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Identity(3, 3);
  Eigen::VectorXd y(3);
  y << 3, 1, 2;
  SUBCASE("orthogonal example at k = 1") {
    CHECK(fs_surrogate_bound(X, y, 1) == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("noiseless two-feature model at k = 1") {
    Eigen::MatrixXd X2 = Eigen::MatrixXd::Random(20, 4);
    Eigen::VectorXd y2 = X2.col(1) + 0.5 * X2.col(2);
    CHECK(fs_surrogate_bound(X2, y2, 1) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("out-of-range k is rejected") {
    CHECK_THROWS_AS(fs_surrogate_bound(X, y, 2), std::invalid_argument);
  }
}

TEST_CASE("surrogate bound never exceeds the FS error at k") {
  for (std::uint64_t seed : {11, 12, 13}) {
    const auto inst = oracles::random_instance(25, 7, 3, 1.0, seed);
    const FsPath path = fs_path(inst.X, inst.y, 6);
    for (int k = 1; k < 6; ++k) {
      const double at_k = path.sse[k - 1] / 25.0;
      CHECK(fs_surrogate_bound(path, k, 25) <= at_k + 1e-12);
    }
  }
}

TEST_CASE("kmax bounds are validated") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(5, 3);
  Eigen::VectorXd y = Eigen::VectorXd::Random(5);
  CHECK_THROWS_AS(fs_path(X, y, 0), std::invalid_argument);
  CHECK_THROWS_AS(fs_path(X, y, 5), std::invalid_argument);
}

}  // TEST_SUITE
