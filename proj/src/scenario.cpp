#include "mipboost/scenario.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mipboost {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void check_unit_interval(double v, const char* name) {
  if (v < 0.0 || v >= 1.0) {
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1)");
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  if (n < 2) throw std::invalid_argument("scenario needs n >= 2");
  if (p < 1) throw std::invalid_argument("scenario needs p >= 1");
  if (beta_pattern.size() != p) {
    throw std::invalid_argument("beta pattern length must equal p");
  }
  int nonzeros = 0;
  for (int j = 0; j < p; ++j) {
    if (beta_pattern[j] != 0.0) ++nonzeros;
  }
  if (nonzeros != k0) {
    throw std::invalid_argument("k0 must equal the nonzero count of beta");
  }
  for (int j = 0; j < k0; ++j) {
    if (beta_pattern[j] == 0.0) {
      throw std::invalid_argument("nonzero beta entries must come first");
    }
  }
  if (snr <= 0.0) throw std::invalid_argument("snr must be positive");
  build_correlation(correlation, p);  // parameter + definiteness check
}

Eigen::MatrixXd build_correlation(const CorrelationSpec& spec, int p) {
  if (p < 1) throw std::invalid_argument("dimension must be positive");
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(p, p);

  switch (spec.kind) {
    case CorrelationKind::identity:
      break;
    case CorrelationKind::autoregressive: {
      check_unit_interval(spec.alpha, "alpha");
      for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) {
          const double r = std::pow(spec.alpha, j - i);
          R(i, j) = r;
          R(j, i) = r;
        }
      }
      break;
    }
    case CorrelationKind::block: {
      check_unit_interval(spec.rho, "rho");
      check_unit_interval(spec.omega, "omega");
      if (spec.k0 < 0 || spec.k0 > p) {
        throw std::invalid_argument("block size k0 out of range");
      }
      for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) {
          const bool same_block = (i < spec.k0) == (j < spec.k0);
          const double r = same_block ? spec.rho : spec.omega;
          R(i, j) = r;
          R(j, i) = r;
        }
      }
      break;
    }
  }

  Eigen::LLT<Eigen::MatrixXd> llt(R);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R,
                                                      Eigen::EigenvaluesOnly);
    throw std::invalid_argument(
        "correlation matrix is not positive definite (smallest eigenvalue " +
        std::to_string(es.eigenvalues().minCoeff()) + ")");
  }
  return R;
}

Eigen::MatrixXd sample_design(int n, const Eigen::MatrixXd& R,
                              std::mt19937_64& rng) {
  const int p = static_cast<int>(R.rows());
  Eigen::LLT<Eigen::MatrixXd> llt(R);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("covariance factorization failed");
  }
  const Eigen::MatrixXd L = llt.matrixL();

  Eigen::MatrixXd G(n, p);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < n; ++i) G(i, j) = normal(rng);
  }
  return G * L.transpose();
}

Eigen::MatrixXd sample_design(int n, const Eigen::MatrixXd& R,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_design(n, R, rng);
}

double noise_scale_for_snr(const Eigen::VectorXd& beta,
                           const Eigen::MatrixXd& R, double snr) {
  if (snr <= 0.0) throw std::invalid_argument("snr must be positive");
  const double signal_var = beta.dot(R * beta);
  if (signal_var <= 0.0) {
    throw std::invalid_argument("snr undefined for beta = 0");
  }
  return std::sqrt(signal_var / snr);
}

std::pair<Dataset, TruthRecord> generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const Eigen::MatrixXd R = build_correlation(cfg.correlation, cfg.p);
  const double theta = noise_scale_for_snr(cfg.beta_pattern, R, cfg.snr);

  std::mt19937_64 rng(cfg.seed);
  Dataset d;
  d.X = sample_design(cfg.n, R, rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd eps(cfg.n);
  for (int i = 0; i < cfg.n; ++i) eps[i] = theta * normal(rng);
  d.y = d.X * cfg.beta_pattern + eps;
  d.provenance = Provenance::raw;
  d.feature_names.reserve(cfg.p);
  for (int j = 0; j < cfg.p; ++j) {
    d.feature_names.push_back("x" + std::to_string(j + 1));
  }

  TruthRecord truth;
  truth.beta = cfg.beta_pattern;
  for (int j = 0; j < cfg.p; ++j) {
    if (cfg.beta_pattern[j] != 0.0) truth.active_set.push_back(j);
  }
  truth.theta = theta;
  truth.population_r2 = cfg.snr / (1.0 + cfg.snr);
  return {d, truth};
}

Eigen::VectorXd parse_beta_pattern(const std::string& text, int p) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    token = trim(token);
    if (token.empty()) continue;
    const auto xpos = token.find('x');
    double value = 0.0;
    long count = 1;
    try {
      if (xpos == std::string::npos) {
        value = std::stod(token);
      } else {
        value = std::stod(token.substr(0, xpos));
        count = std::stol(token.substr(xpos + 1));
      }
    } catch (const std::exception&) {
      throw std::invalid_argument("bad beta pattern token: " + token);
    }
    if (count < 0) throw std::invalid_argument("bad beta pattern token: " + token);
    for (long c = 0; c < count; ++c) values.push_back(value);
  }
  if (static_cast<int>(values.size()) > p) {
    throw std::invalid_argument("beta pattern longer than p");
  }
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  for (int j = 0; j < static_cast<int>(values.size()); ++j) beta[j] = values[j];
  return beta;
}

namespace {

ScenarioConfig config_from_keys(const std::string& name,
                                const std::map<std::string, std::string>& kv) {
  ScenarioConfig cfg;
  cfg.name = name;
  auto get = [&kv](const std::string& key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  auto require = [&](const std::string& key) -> const std::string& {
    const std::string* v = get(key);
    if (!v) {
      throw std::invalid_argument("scenario \"" + name + "\" missing key: " +
                                  key);
    }
    return *v;
  };

  cfg.n = std::stoi(require("n"));
  cfg.p = std::stoi(require("p"));
  cfg.k0 = std::stoi(require("k0"));
  cfg.snr = std::stod(require("snr"));
  if (const auto* s = get("seed")) cfg.seed = std::stoull(*s);
  if (const auto* s = get("replicates")) cfg.replicates = std::stoi(*s);

  const std::string corr = get("correlation") ? *get("correlation") : "identity";
  if (corr == "identity") {
    cfg.correlation.kind = CorrelationKind::identity;
  } else if (corr == "autoregressive" || corr == "ar") {
    cfg.correlation.kind = CorrelationKind::autoregressive;
    cfg.correlation.alpha = std::stod(require("alpha"));
  } else if (corr == "block") {
    cfg.correlation.kind = CorrelationKind::block;
    cfg.correlation.rho = std::stod(require("rho"));
    cfg.correlation.omega = std::stod(require("omega"));
    cfg.correlation.k0 = cfg.k0;
  } else {
    throw std::invalid_argument("unknown correlation kind: " + corr);
  }

  if (const auto* s = get("beta")) {
    cfg.beta_pattern = parse_beta_pattern(*s, cfg.p);
  } else {
    // default pattern: unit signal on the first k0 features
    std::string pattern = "1x" + std::to_string(cfg.k0);
    cfg.beta_pattern = parse_beta_pattern(pattern, cfg.p);
  }
  cfg.validate();
  return cfg;
}

}  // namespace

std::vector<ScenarioConfig> read_scenario_configs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);

  std::map<std::string, std::string> defaults;
  std::vector<std::pair<std::string, std::map<std::string, std::string>>>
      sections;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::invalid_argument("bad section header at line " +
                                    std::to_string(lineno));
      }
      sections.emplace_back(trim(line.substr(1, line.size() - 2)), defaults);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("expected key = value at line " +
                                  std::to_string(lineno));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (sections.empty()) {
      defaults[key] = value;
    } else {
      sections.back().second[key] = value;
    }
  }

  std::vector<ScenarioConfig> configs;
  if (sections.empty() && !defaults.empty()) {
    configs.push_back(config_from_keys("scenario", defaults));
  }
  for (const auto& [name, kv] : sections) {
    configs.push_back(config_from_keys(name, kv));
  }
  if (configs.empty()) {
    throw std::invalid_argument("config file defines no scenarios: " + path);
  }
  return configs;
}

}  // namespace mipboost
