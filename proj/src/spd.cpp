#include "mdpreg/spd.hpp"

#include <cmath>
#include <stdexcept>

namespace mdpreg {

namespace {

Matrix try_factorize(const Matrix& sym) {
  Eigen::LLT<Matrix> llt(sym);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  return Matrix();
}

}  // namespace

SpdMatrix::SpdMatrix(const Matrix& values) {
  if (values.rows() != values.cols()) {
    throw std::invalid_argument("SpdMatrix: matrix not square");
  }
  const double scale = values.cwiseAbs().maxCoeff();
  if (scale > 0 &&
      (values - values.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("SpdMatrix: matrix not symmetric");
  }
  Matrix sym = 0.5 * (values + values.transpose());
  chol_ = try_factorize(sym);
  if (chol_.size() == 0) {
    const double jitter = 1e-10 * sym.trace() / static_cast<double>(sym.rows());
    sym.diagonal().array() += jitter;
    chol_ = try_factorize(sym);
    if (chol_.size() == 0) {
      throw std::domain_error("SpdMatrix: matrix not positive definite after jitter");
    }
  }
}

SpdMatrix SpdMatrix::identity(int dim) {
  SpdMatrix out;
  out.chol_ = Matrix::Identity(dim, dim);
  return out;
}

SpdMatrix SpdMatrix::from_cholesky(const Matrix& lower) {
  if (lower.rows() != lower.cols()) {
    throw std::invalid_argument("SpdMatrix: Cholesky factor not square");
  }
  if ((lower.diagonal().array() <= 0.0).any()) {
    throw std::domain_error("SpdMatrix: Cholesky factor has non-positive diagonal");
  }
  SpdMatrix out;
  out.chol_ = lower.triangularView<Eigen::Lower>();
  return out;
}

double SpdMatrix::logdet() const {
  return 2.0 * chol_.diagonal().array().log().sum();
}

Matrix SpdMatrix::solve(const Matrix& b) const {
  Matrix y = chol_.triangularView<Eigen::Lower>().solve(b);
  return chol_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Vector SpdMatrix::solve(const Vector& b) const {
  Vector y = chol_.triangularView<Eigen::Lower>().solve(b);
  return chol_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Matrix SpdMatrix::multiply(const Matrix& b) const {
  return chol_ * (chol_.transpose() * b);
}

double SpdMatrix::quad(const Vector& x) const {
  return (chol_.transpose() * x).squaredNorm();
}

Matrix SpdMatrix::quad(const Matrix& b) const {
  Matrix t = chol_.transpose() * b;
  return t.transpose() * t;
}

double SpdMatrix::inv_quad(const Vector& x) const {
  return chol_.triangularView<Eigen::Lower>().solve(x).squaredNorm();
}

Vector SpdMatrix::inverse_diag() const {
  Matrix linv = chol_.triangularView<Eigen::Lower>().solve(
      Matrix::Identity(chol_.rows(), chol_.cols()));
  return linv.colwise().squaredNorm();
}

Matrix SpdMatrix::inverse() const {
  Matrix eye = Matrix::Identity(chol_.rows(), chol_.cols());
  return solve(eye);
}

SpdMatrix SpdMatrix::rank_one_update(const Vector& v, double c) const {
  if (c < 0.0) throw std::invalid_argument("rank_one_update: negative weight");
  if (v.size() != chol_.rows()) {
    throw std::invalid_argument("rank_one_update: dimension mismatch");
  }
  SpdMatrix out;
  out.chol_ = chol_;
  if (c == 0.0) return out;

  const auto n = v.size();
  Vector w = std::sqrt(c) * v;
  Matrix& l = out.chol_;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double r = std::hypot(l(k, k), w(k));
    const double cth = r / l(k, k);
    const double sth = w(k) / l(k, k);
    l(k, k) = r;
    for (Eigen::Index i = k + 1; i < n; ++i) {
      l(i, k) = (l(i, k) + sth * w(i)) / cth;
      w(i) = cth * w(i) - sth * l(i, k);
    }
  }
  return out;
}

}  // namespace mdpreg
