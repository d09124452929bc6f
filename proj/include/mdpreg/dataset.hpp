#pragma once

#include <string>
#include <vector>

#include "mdpreg/model.hpp"

namespace mdpreg::cli {

struct Dataset {
  Matrix covariates;  // n x p
  Matrix responses;   // n x m
  std::vector<std::string> covariate_names;
  std::vector<std::string> response_names;
};

// Numeric CSV with a header row. response_cols is a comma-separated list of
// column names, or of 1-based column indices when every token is numeric.
// Remaining columns form the covariates.
Dataset ingest_csv(const std::string& path, const std::string& response_cols);

struct Metrics {
  Vector rmse;                    // per response dimension
  Vector mape;                    // per response dimension, zero-truth rows skipped
  std::vector<long> mape_skipped; // skipped row count per dimension
  double mean_rmse = 0.0;
  double mean_mape = 0.0;
};

Metrics metrics(const Matrix& truth, const Matrix& fitted);

// In-sample fitted values y_i = (sum_j q_ij beta_j)^T E_i.
Matrix insample_fit(const model::VariationalState& s, const Matrix& alloc,
                    const Matrix& designs);

int run_cli(const std::vector<std::string>& args);

}  // namespace mdpreg::cli
