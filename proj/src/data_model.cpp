#include "mipboost/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mipboost {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& raw, double& out) {
  const std::string s = trim(raw);
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last && std::isfinite(out);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Dataset load_csv_impl(const std::string& path, int response_index,
                      const std::string& response_name, bool by_name,
                      std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);

  std::string header_line;
  if (!std::getline(in, header_line)) {
    throw std::runtime_error("empty file: " + path);
  }
  std::vector<std::string> header = split_csv_line(header_line);
  for (auto& h : header) h = trim(h);

  int resp = response_index;
  if (by_name) {
    auto it = std::find(header.begin(), header.end(), response_name);
    if (it == header.end()) {
      throw std::runtime_error("response column not found: " + response_name);
    }
    resp = static_cast<int>(it - header.begin());
  }
  if (resp < 0 || resp >= static_cast<int>(header.size())) {
    throw std::runtime_error("response column not found: index " +
                             std::to_string(resp));
  }

  const int ncols = static_cast<int>(header.size());
  std::vector<std::vector<double>> rows;
  std::string line;
  int file_row = 1;  // header was row 1
  while (std::getline(in, line)) {
    ++file_row;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != ncols) {
      throw std::runtime_error("row " + std::to_string(file_row) + " has " +
                               std::to_string(cells.size()) +
                               " cells, expected " + std::to_string(ncols));
    }
    std::vector<double> vals(ncols);
    for (int c = 0; c < ncols; ++c) {
      if (!parse_double(cells[c], vals[c])) {
        throw std::runtime_error("non-numeric cell at row " +
                                 std::to_string(file_row) + ", column \"" +
                                 header[c] + "\"");
      }
    }
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw std::runtime_error("no data rows in " + path);

  const int n = static_cast<int>(rows.size());
  const int p = ncols - 1;
  Dataset d;
  d.y.resize(n);
  d.X.resize(n, p);
  d.feature_names.reserve(p);
  for (int c = 0; c < ncols; ++c) {
    if (c != resp) d.feature_names.push_back(header[c]);
  }
  for (int i = 0; i < n; ++i) {
    d.y[i] = rows[i][resp];
    int jj = 0;
    for (int c = 0; c < ncols; ++c) {
      if (c == resp) continue;
      d.X(i, jj++) = rows[i][c];
    }
  }

  std::set<std::string> uniq(d.feature_names.begin(), d.feature_names.end());
  if (uniq.size() != d.feature_names.size()) {
    throw std::runtime_error("duplicate feature names in header of " + path);
  }

  if (warnings) {
    for (int j = 0; j < p; ++j) {
      const double mean = d.X.col(j).mean();
      const double var = (d.X.col(j).array() - mean).square().sum();
      if (var == 0.0) {
        warnings->push_back("feature \"" + d.feature_names[j] +
                            "\" has zero variance");
      }
    }
  }

  d.provenance = Provenance::raw;
  return d;
}

}  // namespace

std::vector<int> FoldAssignment::rows_in_fold(int fold) const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(assignment.size()); ++i) {
    if (assignment[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<int> FoldAssignment::rows_not_in_fold(int fold) const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(assignment.size()); ++i) {
    if (assignment[i] != fold) out.push_back(i);
  }
  return out;
}

Dataset load_csv(const std::string& path, const std::string& response_column,
                 std::vector<std::string>* warnings) {
  return load_csv_impl(path, -1, response_column, true, warnings);
}

Dataset load_csv(const std::string& path, int response_index,
                 std::vector<std::string>* warnings) {
  return load_csv_impl(path, response_index, "", false, warnings);
}

void save_csv(const Dataset& d, const std::string& path,
              const std::string& response_name) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << response_name;
  for (const auto& name : d.feature_names) out << ',' << name;
  out << '\n';
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    out << format_double(d.y[i]);
    for (Eigen::Index j = 0; j < d.p(); ++j) {
      out << ',' << format_double(d.X(i, j));
    }
    out << '\n';
  }
}

std::pair<Dataset, ScalingRecord> standardize(const Dataset& d,
                                              bool scale_response) {
  if (d.provenance != Provenance::raw) {
    throw std::invalid_argument("standardize expects raw data");
  }
  const Eigen::Index n = d.n();
  const Eigen::Index p = d.p();
  if (n < 2) throw std::invalid_argument("standardize needs n >= 2");

  ScalingRecord rec;
  rec.column_means.resize(p);
  rec.column_stds.resize(p);

  Dataset out = d;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double mean = d.X.col(j).mean();
    const double ss = (d.X.col(j).array() - mean).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd == 0.0) {
      throw std::invalid_argument("zero-variance feature: " +
                                  d.feature_names[j]);
    }
    rec.column_means[j] = mean;
    rec.column_stds[j] = sd;
    out.X.col(j) = (d.X.col(j).array() - mean) / sd;
  }

  rec.y_mean = d.y.mean();
  out.y = d.y.array() - rec.y_mean;
  if (scale_response) {
    const double ysd = std::sqrt(out.y.squaredNorm() / static_cast<double>(n - 1));
    if (ysd == 0.0) throw std::invalid_argument("response has zero variance");
    rec.y_std = ysd;
    out.y /= ysd;
  }

  out.provenance = Provenance::standardized;
  out.scaling = rec;
  return {out, rec};
}

Dataset unstandardize(const Dataset& d, const ScalingRecord& record) {
  if (d.provenance != Provenance::standardized) {
    throw std::invalid_argument("unstandardize expects standardized data");
  }
  Dataset out = d;
  for (Eigen::Index j = 0; j < d.p(); ++j) {
    out.X.col(j) =
        d.X.col(j).array() * record.column_stds[j] + record.column_means[j];
  }
  out.y = d.y.array() * record.y_std + record.y_mean;
  out.provenance = Provenance::raw;
  out.scaling.reset();
  return out;
}

std::pair<Eigen::VectorXd, double> coefficients_to_raw(
    const Eigen::VectorXd& beta_std, const ScalingRecord& record) {
  Eigen::VectorXd beta_raw(beta_std.size());
  double intercept = record.y_mean;
  for (Eigen::Index j = 0; j < beta_std.size(); ++j) {
    beta_raw[j] = beta_std[j] * record.y_std / record.column_stds[j];
    intercept -= beta_raw[j] * record.column_means[j];
  }
  return {beta_raw, intercept};
}

FoldAssignment make_folds(int n, int v, std::uint64_t seed) {
  if (v < 2) throw std::invalid_argument("fold count must be at least 2");
  if (v > n) throw std::invalid_argument("fold count exceeds observation count");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  FoldAssignment fa;
  fa.v = v;
  fa.seed = seed;
  fa.assignment.assign(n, 0);
  for (int t = 0; t < n; ++t) {
    fa.assignment[order[t]] = (t % v) + 1;
  }
  return fa;
}

Dataset expand_features(const Dataset& d,
                        const std::vector<std::string>& square_exclusions) {
  if (d.provenance != Provenance::raw) {
    throw std::invalid_argument("expand_features expects raw data");
  }
  const Eigen::Index n = d.n();
  const Eigen::Index p = d.p();

  std::set<Eigen::Index> excluded;
  for (const auto& name : square_exclusions) {
    auto it = std::find(d.feature_names.begin(), d.feature_names.end(), name);
    if (it == d.feature_names.end()) {
      throw std::invalid_argument("unknown column in exclusion list: " + name);
    }
    excluded.insert(it - d.feature_names.begin());
  }

  const Eigen::Index n_pairs = p * (p - 1) / 2;
  const Eigen::Index n_squares = p - static_cast<Eigen::Index>(excluded.size());
  Dataset out;
  out.y = d.y;
  out.X.resize(n, p + n_pairs + n_squares);
  out.feature_names = d.feature_names;
  out.X.leftCols(p) = d.X;

  Eigen::Index col = p;
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i + 1; j < p; ++j) {
      out.X.col(col) = d.X.col(i).cwiseProduct(d.X.col(j));
      out.feature_names.push_back(d.feature_names[i] + "*" +
                                  d.feature_names[j]);
      ++col;
    }
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    if (excluded.count(j)) continue;
    out.X.col(col) = d.X.col(j).cwiseAbs2();
    out.feature_names.push_back(d.feature_names[j] + "^2");
    ++col;
  }

  out.provenance = Provenance::raw;
  return out;
}

}  // namespace mipboost
