#pragma once

#include <Eigen/Dense>

namespace mdpreg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Symmetric positive-definite matrix carried by its lower Cholesky factor.
// Every determinant, solve and quadratic form goes through the factor; the
// dense value matrix is rebuilt on demand. Construction from a dense matrix
// that fails to factorize gets one diagonal jitter of 1e-10*trace/dim, then
// a hard error.
class SpdMatrix {
 public:
  SpdMatrix() = default;
  explicit SpdMatrix(const Matrix& values);

  static SpdMatrix identity(int dim);
  static SpdMatrix from_cholesky(const Matrix& lower);

  int dim() const { return static_cast<int>(chol_.rows()); }
  const Matrix& chol() const { return chol_; }
  Matrix values() const { return chol_ * chol_.transpose(); }

  double logdet() const;

  // V^{-1} b
  Matrix solve(const Matrix& b) const;
  Vector solve(const Vector& b) const;
  // V b, computed as L (L^T b)
  Matrix multiply(const Matrix& b) const;
  // x^T V x
  double quad(const Vector& x) const;
  // b^T V b
  Matrix quad(const Matrix& b) const;
  // x^T V^{-1} x
  double inv_quad(const Vector& x) const;
  // diag(V^{-1})
  Vector inverse_diag() const;
  Matrix inverse() const;

  // Cholesky of V + c v v^T without refactorizing; requires c >= 0.
  SpdMatrix rank_one_update(const Vector& v, double c) const;

 private:
  Matrix chol_;
};

}  // namespace mdpreg
