#pragma once

#include <array>
#include <functional>

#include "mdpreg/regadjust.hpp"

namespace mdpreg::priorcheck {

// Product-Gaussian kernel density estimate with per-dimension Silverman
// bandwidth 1.06 sd n^{-1/5}; supports d in {1,2,3}.
struct Kde {
  Matrix points;
  Vector bandwidth;

  double eval(const Vector& x) const;
  Vector eval_rows(const Matrix& x) const;
};

Kde fit_kde(const Matrix& sample);
Vector kde(const Matrix& sample, const Matrix& eval_points);

// P_hat(S_j^0, lambda) = (1/n) sum_i I(p_hat(S_i^a) <= p_hat(S_j^0)) with the
// KDE fitted on the adjusted sample; returns one p-value per baseline row.
Vector conflict_pvalues(const Matrix& adjusted_sample,
                        const Matrix& baseline_sample);

// zeta_gamma = 0 when q_gamma > p_gamma, else 1 - q_gamma / p_gamma, with
// p_gamma the empirical gamma-quantile of the baseline p-values and q_gamma
// the alternative's conflict rate at that threshold.
double weak_informativity_zeta(const Vector& baseline_pvals,
                               const Vector& alt_pvals, double gamma);

using Simulator = std::function<Vector(const Vector& lambda, numstat::Rng& rng)>;

struct ScanConfig {
  Matrix grid;              // one hyperparameter point per row
  Vector baseline_lambda;
  double gamma = 0.05;
  int k_neighbors = 1000;
  long baseline_count = 10000;
  std::uint64_t seed = 0;
};

struct ScanResult {
  Vector zeta;              // per grid row
  Matrix pvalues;           // grid rows x baseline_count
  Vector baseline_pvalues;  // conflict p-values of the baseline draws at lambda_0
};

// Regression-based conflict screening over a hyperparameter grid: for each
// grid point, transport the k nearest simulated statistics to it, fit a KDE,
// compute the baseline draws' conflict p-values and the resulting zeta.
ScanResult prior_scan(const Simulator& simulator, const ScanConfig& cfg,
                      const model::VariationalState& s,
                      const model::Hyperparameters& h,
                      const basis::BasisMap& bm, const Matrix& lambda_corpus,
                      const Matrix& stat_corpus);

// ---------------------------------------------------------------------------
// bioassay demo generator

// Standardized log-dose design points of the four-group assay.
inline constexpr std::array<double, 4> kBioassayDoses{-0.86, -0.30, -0.05, 0.73};
inline constexpr int kBioassayTrials = 5;

// Posterior mode of the logistic model logit(p_i) = c0 + c1 x_i under
// independent N(0, prior_sd^2) priors, by Newton iteration with step halving.
Vector bioassay_posterior_mode(const std::array<int, 4>& deaths,
                               double prior_sd,
                               const std::array<int, 4>& trials = {5, 5, 5, 5});

// Fitted-probability statistic (p2_hat, p3_hat). The printed transform uses
// 1/(1+exp(-c0 + c1 x_i)); printed_sign = false gives the conventional
// 1/(1+exp(-(c0 + c1 x_i))).
Vector bioassay_statistic(const Vector& mode, bool printed_sign = true);

// Draw (c0, c1) from the N(0, sigma^2) priors, binomial counts, then the
// sigma=10 posterior-mode statistic.
Vector bioassay_simulate(double sigma0, double sigma1, numstat::Rng& rng,
                         bool printed_sign = true);

}  // namespace mdpreg::priorcheck
