#pragma once

#include <cstdint>
#include <random>

#include "mdpreg/spd.hpp"

namespace mdpreg::numstat {

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Independent stream for parallel or phased work under one user seed.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

// log Gamma_m(x) = m(m-1)/4 log(pi) + sum_{i=1..m} log Gamma(x + (1-i)/2),
// defined for x > (m-1)/2.
double log_mvgamma(int m, double x);

// d/dx log Gamma_m(x) = sum_{i=1..m} psi(x + (1-i)/2)
double mv_digamma(int m, double x);

double digamma(double x);

struct MatrixNormalParams {
  Matrix mean;       // s x t
  SpdMatrix row_cov;  // V, s x s
  SpdMatrix col_cov;  // W, t x t
};

struct InvWishartParams {
  double dof = 0.0;  // nu > dim - 1
  SpdMatrix scale;   // S
};

// Density proportional to x^{-(shape+1)} exp(-rate/x).
struct InvGammaParams {
  double shape = 0.0;  // a
  double rate = 0.0;   // b
};

double matrix_normal_logpdf(const Matrix& z, const MatrixNormalParams& p);

// Log density of the normalized form of |1 + (y-mu)^T A (y-mu)|^{-k/2}; the
// implied Student-t degrees of freedom are k - m, so k must exceed dim(y).
double mvt_logpdf(const Vector& y, const Vector& location,
                  const SpdMatrix& scale, double tail_exponent);

Matrix sample_matrix_normal(const MatrixNormalParams& p, Rng& rng);
Matrix sample_inverse_wishart(const InvWishartParams& p, Rng& rng);
double sample_inverse_gamma(const InvGammaParams& p, Rng& rng);

}  // namespace mdpreg::numstat
