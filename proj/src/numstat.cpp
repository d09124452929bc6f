#include "mdpreg/numstat.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mdpreg::numstat {

namespace {
constexpr double kLogPi = 1.1447298858494001741;
constexpr double kLog2Pi = 1.8378770664093454836;

void check_mvgamma_domain(int m, double x) {
  if (m < 1) throw std::domain_error("multivariate gamma: order must be >= 1");
  if (!(x > 0.5 * (m - 1))) {
    throw std::domain_error("multivariate gamma: argument must exceed (m-1)/2");
  }
}
}  // namespace

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 scramble so nearby (seed, stream) pairs decorrelate
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return Rng(z ^ (z >> 31));
}

double log_mvgamma(int m, double x) {
  check_mvgamma_domain(m, x);
  double out = 0.25 * m * (m - 1) * kLogPi;
  for (int i = 1; i <= m; ++i) {
    out += std::lgamma(x + 0.5 * (1 - i));
  }
  return out;
}

double mv_digamma(int m, double x) {
  check_mvgamma_domain(m, x);
  double out = 0.0;
  for (int i = 1; i <= m; ++i) {
    out += boost::math::digamma(x + 0.5 * (1 - i));
  }
  return out;
}

double digamma(double x) { return boost::math::digamma(x); }

double matrix_normal_logpdf(const Matrix& z, const MatrixNormalParams& p) {
  const auto s = z.rows();
  const auto t = z.cols();
  if (p.mean.rows() != s || p.mean.cols() != t || p.row_cov.dim() != s ||
      p.col_cov.dim() != t) {
    throw std::invalid_argument("matrix_normal_logpdf: dimension mismatch");
  }
  // tr(V^{-1} D W^{-1} D^T) = ||Lv^{-1} D Lw^{-T}||_F^2
  Matrix d = z - p.mean;
  Matrix g = p.row_cov.chol().triangularView<Eigen::Lower>().solve(d);
  Matrix h = p.col_cov.chol().triangularView<Eigen::Lower>().solve(g.transpose());
  const double qform = h.squaredNorm();
  return -0.5 * s * t * kLog2Pi - 0.5 * t * p.row_cov.logdet() -
         0.5 * s * p.col_cov.logdet() - 0.5 * qform;
}

double mvt_logpdf(const Vector& y, const Vector& location,
                  const SpdMatrix& scale, double tail_exponent) {
  const int m = static_cast<int>(y.size());
  if (location.size() != m || scale.dim() != m) {
    throw std::invalid_argument("mvt_logpdf: dimension mismatch");
  }
  if (!(tail_exponent > m)) {
    throw std::domain_error("mvt_logpdf: tail exponent must exceed dimension");
  }
  const Vector diff = y - location;
  const double q = scale.quad(diff);
  return std::lgamma(0.5 * tail_exponent) -
         std::lgamma(0.5 * (tail_exponent - m)) - 0.5 * m * kLogPi +
         0.5 * scale.logdet() - 0.5 * tail_exponent * std::log1p(q);
}

Matrix sample_matrix_normal(const MatrixNormalParams& p, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix z(p.mean.rows(), p.mean.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, j) = gauss(rng);
  }
  return p.mean + p.row_cov.chol() * z * p.col_cov.chol().transpose();
}

Matrix sample_inverse_wishart(const InvWishartParams& p, Rng& rng) {
  const int m = p.scale.dim();
  if (!(p.dof > m - 1)) {
    throw std::domain_error("sample_inverse_wishart: dof must exceed dim - 1");
  }
  // Bartlett draw of W ~ Wishart(dof, S^{-1}), then return W^{-1}.
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix a = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    std::gamma_distribution<double> chisq(0.5 * (p.dof - i), 2.0);
    a(i, i) = std::sqrt(chisq(rng));
    for (int j = 0; j < i; ++j) a(i, j) = gauss(rng);
  }
  // U with U U^T = S^{-1}: U = L_S^{-T}
  Matrix u = p.scale.chol().transpose().triangularView<Eigen::Upper>().solve(
      Matrix::Identity(m, m));
  Matrix b = u * a;
  Matrix w = b * b.transpose();
  return SpdMatrix(w).inverse();
}

double sample_inverse_gamma(const InvGammaParams& p, Rng& rng) {
  if (!(p.shape > 0.0) || !(p.rate > 0.0)) {
    throw std::domain_error("sample_inverse_gamma: parameters must be positive");
  }
  std::gamma_distribution<double> gamma(p.shape, 1.0 / p.rate);
  return 1.0 / gamma(rng);
}

}  // namespace mdpreg::numstat
