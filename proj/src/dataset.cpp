#include "mdpreg/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mdpreg::cli {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

}  // namespace

Dataset ingest_csv(const std::string& path, const std::string& response_cols) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("ingest_csv: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("ingest_csv: empty file " + path);
  }
  std::vector<std::string> header;
  for (auto& h : split(line, ',')) header.push_back(trim(h));
  const std::size_t ncols = header.size();

  // resolve response columns: names, or 1-based indices when all numeric;
  // an empty spec reads the whole file as covariates
  std::vector<std::string> tokens;
  for (auto& t : split(response_cols, ',')) {
    auto tt = trim(t);
    if (!tt.empty()) tokens.push_back(tt);
  }
  const bool all_numeric =
      std::all_of(tokens.begin(), tokens.end(), [](const std::string& t) {
        return !t.empty() &&
               std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(c); });
      });
  std::vector<std::size_t> response_idx;
  for (const auto& t : tokens) {
    if (all_numeric) {
      const std::size_t idx = std::stoul(t);
      if (idx < 1 || idx > ncols) {
        throw std::runtime_error("ingest_csv: response column index " + t +
                                 " out of range");
      }
      response_idx.push_back(idx - 1);
    } else {
      auto it = std::find(header.begin(), header.end(), t);
      if (it == header.end()) {
        throw std::runtime_error("ingest_csv: unknown response column '" + t + "'");
      }
      response_idx.push_back(static_cast<std::size_t>(it - header.begin()));
    }
  }

  std::vector<bool> is_response(ncols, false);
  for (auto idx : response_idx) is_response[idx] = true;

  std::vector<std::vector<double>> rows;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() != ncols) {
      throw std::runtime_error("ingest_csv: ragged row at line " +
                               std::to_string(line_no));
    }
    std::vector<double> row(ncols);
    for (std::size_t c = 0; c < ncols; ++c) {
      const std::string cell = trim(fields[c]);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size() || cell.empty() || !std::isfinite(v)) {
        throw std::runtime_error("ingest_csv: non-numeric cell '" + cell +
                                 "' at line " + std::to_string(line_no));
      }
      row[c] = v;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("ingest_csv: no data rows in " + path);

  Dataset out;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = static_cast<Eigen::Index>(response_idx.size());
  const auto p = static_cast<Eigen::Index>(ncols) - m;
  out.covariates.resize(n, p);
  out.responses.resize(n, m);
  for (std::size_t c = 0; c < ncols; ++c) {
    (is_response[c] ? out.response_names : out.covariate_names).push_back(header[c]);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index xc = 0;
    Eigen::Index yc = 0;
    for (std::size_t c = 0; c < ncols; ++c) {
      if (is_response[c]) continue;
      out.covariates(i, xc++) = rows[i][c];
    }
    for (auto idx : response_idx) out.responses(i, yc++) = rows[i][idx];
  }
  return out;
}

Metrics metrics(const Matrix& truth, const Matrix& fitted) {
  if (truth.rows() != fitted.rows() || truth.cols() != fitted.cols()) {
    throw std::invalid_argument("metrics: shape mismatch");
  }
  const auto n = truth.rows();
  const auto m = truth.cols();
  Metrics out;
  out.rmse.resize(m);
  out.mape.resize(m);
  out.mape_skipped.assign(m, 0);
  for (Eigen::Index l = 0; l < m; ++l) {
    out.rmse(l) =
        std::sqrt((truth.col(l) - fitted.col(l)).squaredNorm() / double(n));
    double acc = 0.0;
    long used = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (truth(i, l) == 0.0) {
        ++out.mape_skipped[l];
        continue;
      }
      acc += std::abs((truth(i, l) - fitted(i, l)) / truth(i, l));
      ++used;
    }
    out.mape(l) = used > 0 ? acc / double(used) : 0.0;
  }
  out.mean_rmse = out.rmse.mean();
  out.mean_mape = out.mape.mean();
  return out;
}

Matrix insample_fit(const model::VariationalState& s, const Matrix& alloc,
                    const Matrix& designs) {
  if (alloc.rows() != designs.rows() ||
      alloc.cols() != static_cast<Eigen::Index>(s.components.size())) {
    throw std::invalid_argument("insample_fit: allocation table shape mismatch");
  }
  Matrix fitted = Matrix::Zero(designs.rows(), s.response_dim);
  for (int j = 0; j < s.trunc(); ++j) {
    fitted.noalias() +=
        alloc.col(j).asDiagonal() * (designs * s.components[j].beta_hat);
  }
  return fitted;
}

}  // namespace mdpreg::cli
