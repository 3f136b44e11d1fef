#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mipboost/least_squares.hpp"
#include "mipboost/scenario.hpp"

using namespace mipboost;

TEST_SUITE("scenario") {

TEST_CASE("autoregressive correlation formula") {
  CorrelationSpec spec;
  spec.kind = CorrelationKind::autoregressive;
  spec.alpha = 0.9;
  const Eigen::MatrixXd R = build_correlation(spec, 3);
  CHECK(R(0, 0) == 1.0);
  CHECK(R(0, 1) == doctest::Approx(0.9));
  CHECK(R(0, 2) == doctest::Approx(0.81));
  CHECK(R(1, 2) == doctest::Approx(0.9));
  CHECK((R - R.transpose()).cwiseAbs().maxCoeff() == 0.0);

  spec.alpha = 0.0;
  CHECK(build_correlation(spec, 4).isIdentity(0.0));
}

TEST_CASE("block correlation layout") {
  CorrelationSpec spec;
  spec.kind = CorrelationKind::block;
  spec.rho = 0.5;
  spec.omega = 0.4;
  spec.k0 = 2;
  const Eigen::MatrixXd R = build_correlation(spec, 4);
  CHECK(R(0, 1) == 0.5);
  CHECK(R(2, 3) == 0.5);
  CHECK(R(0, 2) == 0.4);
  CHECK(R(0, 3) == 0.4);
  CHECK(R(1, 2) == 0.4);
  CHECK(R.diagonal().isOnes(0.0));
}

TEST_CASE("non-positive-definite block parameters are rejected") {
  CorrelationSpec spec;
  spec.kind = CorrelationKind::block;
  spec.rho = 0.1;
  spec.omega = 0.9;  // cross-block dominates: indefinite
  spec.k0 = 3;
  CHECK_THROWS_WITH_AS(build_correlation(spec, 6),
                       doctest::Contains("smallest eigenvalue"),
                       std::invalid_argument);
}

TEST_CASE("sample_design matches the target correlation at large n") {
  CorrelationSpec spec;
  spec.kind = CorrelationKind::autoregressive;
  spec.alpha = 0.9;
  const Eigen::MatrixXd R = build_correlation(spec, 5);
  const Eigen::MatrixXd X = sample_design(10000, R, 99);

  auto corr = [&](int a, int b) {
    const auto ca = X.col(a).array() - X.col(a).mean();
    const auto cb = X.col(b).array() - X.col(b).mean();
    return (ca * cb).sum() / std::sqrt(ca.square().sum() * cb.square().sum());
  };
  CHECK(corr(0, 1) == doctest::Approx(0.9).epsilon(0.035));
  CHECK(corr(2, 3) == doctest::Approx(0.9).epsilon(0.035));

  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd Xi = sample_design(10000, I, 7);
  const auto c0 = Xi.col(0).array() - Xi.col(0).mean();
  const auto c1 = Xi.col(1).array() - Xi.col(1).mean();
  const double rho =
      (c0 * c1).sum() / std::sqrt(c0.square().sum() * c1.square().sum());
  CHECK(std::abs(rho) < 0.05);
}

TEST_CASE("sample_design is deterministic in the seed") {
  const Eigen::MatrixXd R = Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd A = sample_design(50, R, 1234);
  const Eigen::MatrixXd B = sample_design(50, R, 1234);
  CHECK((A - B).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("noise_scale_for_snr arithmetic") {
  SUBCASE("identity covariance") {
    Eigen::VectorXd beta(3);
    beta << 1, 1, 0;
    const Eigen::MatrixXd R = Eigen::MatrixXd::Identity(3, 3);
    CHECK(noise_scale_for_snr(beta, R, 2.0) == doctest::Approx(1.0));
  }
  SUBCASE("correlated pair, verified by Monte Carlo") {
    Eigen::VectorXd beta(2);
    beta << 1, 1;
    Eigen::MatrixXd R(2, 2);
    R << 1, 0.9, 0.9, 1;
    const double theta = noise_scale_for_snr(beta, R, 1.0);
    CHECK(theta == doctest::Approx(std::sqrt(3.8)).epsilon(1e-12));

    const Eigen::MatrixXd X = sample_design(20000, R, 5);
    const Eigen::VectorXd s = X * beta;
    const double var = (s.array() - s.mean()).square().sum() / (s.size() - 1);
    CHECK(var == doctest::Approx(3.8).epsilon(0.05));
  }
  SUBCASE("zero beta is rejected") {
    const Eigen::MatrixXd R = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(noise_scale_for_snr(Eigen::VectorXd::Zero(2), R, 1.0),
                    std::invalid_argument);
  }
}

TEST_CASE("population R2 from the SNR") {
  ScenarioConfig cfg;
  cfg.n = 50;
  cfg.p = 12;
  cfg.k0 = 10;
  cfg.snr = 10.0;
  cfg.beta_pattern = parse_beta_pattern("1x10", cfg.p);
  auto [d, truth] = generate_scenario(cfg);
  CHECK(truth.population_r2 == doctest::Approx(10.0 / 11.0).epsilon(1e-12));
  CHECK(truth.theta == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(truth.active_set.size() == 10);
}

TEST_CASE("noiseless limit") {
  ScenarioConfig cfg;
  cfg.n = 200;
  cfg.p = 8;
  cfg.k0 = 3;
  cfg.snr = 1e12;
  cfg.seed = 11;
  cfg.beta_pattern = parse_beta_pattern("1x3", cfg.p);
  auto [d, truth] = generate_scenario(cfg);
  const Eigen::VectorXd resid = d.y - d.X * truth.beta;
  const Eigen::VectorXd signal = d.X * truth.beta;
  const double var_resid =
      (resid.array() - resid.mean()).square().sum() / (resid.size() - 1);
  const double var_signal =
      (signal.array() - signal.mean()).square().sum() / (signal.size() - 1);
  CHECK(var_resid < 1e-10 * var_signal);
}

TEST_CASE("mixed-signal pattern is accepted and recorded") {
  ScenarioConfig cfg;
  cfg.n = 60;
  cfg.p = 100;
  cfg.k0 = 10;
  cfg.snr = 1.0;
  cfg.beta_pattern = parse_beta_pattern("10x7,5x3", cfg.p);
  auto [d, truth] = generate_scenario(cfg);
  CHECK(truth.beta[0] == 10.0);
  CHECK(truth.beta[7] == 5.0);
  CHECK(truth.beta[9] == 5.0);
  CHECK(truth.beta[10] == 0.0);
  CHECK(truth.active_set.size() == 10);
}

TEST_CASE("generation is bit-identical under a fixed seed") {
  ScenarioConfig cfg;
  cfg.n = 40;
  cfg.p = 6;
  cfg.k0 = 2;
  cfg.snr = 1.0;
  cfg.seed = 777;
  cfg.beta_pattern = parse_beta_pattern("1x2", cfg.p);
  auto [a, ta] = generate_scenario(cfg);
  auto [b, tb] = generate_scenario(cfg);
  CHECK((a.X - b.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.y - b.y).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("true-model OLS R2 approaches snr/(1+snr) at n = 5000") {
  for (double snr : {0.5, 1.0, 3.0}) {
    ScenarioConfig cfg;
    cfg.n = 5000;
    cfg.p = 20;
    cfg.k0 = 5;
    cfg.snr = snr;
    cfg.seed = 31 + static_cast<std::uint64_t>(snr * 10);
    cfg.correlation.kind = CorrelationKind::autoregressive;
    cfg.correlation.alpha = 0.5;
    cfg.beta_pattern = parse_beta_pattern("1x5", cfg.p);
    auto [d, truth] = generate_scenario(cfg);
    const Eigen::VectorXd beta_fit =
        least_squares_on_support(d.X, d.y, truth.active_set);
    const double sse = (d.y - d.X * beta_fit).squaredNorm();
    const double tss = (d.y.array() - d.y.mean()).square().sum();
    const double r2 = 1.0 - sse / tss;
    CHECK(r2 == doctest::Approx(snr / (1.0 + snr)).epsilon(0.07));
  }
}

TEST_CASE("scenario config file round trip") {
  const auto path =
      std::filesystem::temp_directory_path() / "scenarios_test.conf";
  {
    std::ofstream out(path);
    out << "# shared defaults\n";
    out << "n = 100\n";
    out << "snr = 1\n";
    out << "replicates = 3\n\n";
    out << "[ar_small]\n";
    out << "p = 20\n";
    out << "k0 = 4\n";
    out << "correlation = autoregressive\n";
    out << "alpha = 0.9\n";
    out << "beta = 1x4\n";
    out << "seed = 5\n\n";
    out << "[block_small]\n";
    out << "p = 10\n";
    out << "k0 = 2\n";
    out << "correlation = block\n";
    out << "rho = 0.5\n";
    out << "omega = 0.4\n";
    out << "beta = 10x1,5x1\n";
  }
  const auto configs = read_scenario_configs(path.string());
  REQUIRE(configs.size() == 2);
  CHECK(configs[0].name == "ar_small");
  CHECK(configs[0].n == 100);
  CHECK(configs[0].correlation.alpha == 0.9);
  CHECK(configs[0].replicates == 3);
  CHECK(configs[1].correlation.kind == CorrelationKind::block);
  CHECK(configs[1].beta_pattern[0] == 10.0);
  CHECK(configs[1].beta_pattern[1] == 5.0);
  CHECK(configs[1].k0 == 2);
}

TEST_CASE("invalid configs are rejected") {
  ScenarioConfig cfg;
  cfg.n = 50;
  cfg.p = 5;
  cfg.k0 = 2;
  cfg.snr = 1.0;
  cfg.beta_pattern = parse_beta_pattern("1x3", cfg.p);  // k0 mismatch
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg.beta_pattern = parse_beta_pattern("0x1,1x2", cfg.p);  // zeros first
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

}  // TEST_SUITE
