#include "mdpreg/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace mdpreg::basis {

Vector Standardizer::apply(const Vector& x) const {
  if (x.size() != mean.size()) {
    throw std::invalid_argument("Standardizer: dimension mismatch");
  }
  return (x - mean).cwiseQuotient(sd);
}

Matrix Standardizer::apply(const Matrix& x) const {
  if (x.cols() != mean.size()) {
    throw std::invalid_argument("Standardizer: dimension mismatch");
  }
  return (x.rowwise() - mean.transpose()).array().rowwise() /
         sd.transpose().array();
}

Standardizer fit_standardizer(const Matrix& x) {
  const auto n = x.rows();
  if (n < 2) throw std::invalid_argument("fit_standardizer: need at least 2 rows");
  Standardizer out;
  out.mean = x.colwise().mean();
  Matrix centered = x.rowwise() - out.mean.transpose();
  out.sd = (centered.array().square().colwise().sum() / double(n)).sqrt();
  for (Eigen::Index j = 0; j < out.sd.size(); ++j) {
    if (!(out.sd(j) > 0.0)) {
      throw std::invalid_argument("fit_standardizer: constant column " +
                                  std::to_string(j));
    }
  }
  return out;
}

Vector BasisMap::expand(const Vector& x) const {
  if (centers.rows() > 0 && x.size() != centers.cols()) {
    throw std::invalid_argument("BasisMap::expand: dimension mismatch");
  }
  Vector e(count() + 1);
  e(0) = 1.0;
  for (int r = 0; r < count(); ++r) {
    const double d = (x - centers.row(r).transpose()).norm();
    const double arg = (kernel == KernelForm::exp_distance) ? d : d * d;
    e(r + 1) = std::exp(-arg / (2.0 * kappa_sq));
  }
  return e;
}

Vector BasisMap::expand_raw(const Vector& x) const {
  return expand(standardizer.apply(x));
}

Matrix BasisMap::expand_raw_rows(const Matrix& x) const {
  Matrix e(x.rows(), count() + 1);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    e.row(i) = expand_raw(x.row(i).transpose()).transpose();
  }
  return e;
}

Matrix select_centers(const Matrix& x, int count, numstat::Rng& rng) {
  const auto n = x.rows();
  if (count > n) throw std::invalid_argument("select_centers: count exceeds rows");
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  // partial Fisher-Yates: the first `count` entries are the sample
  for (int k = 0; k < count; ++k) {
    std::uniform_int_distribution<Eigen::Index> pick(k, n - 1);
    std::swap(idx[k], idx[pick(rng)]);
  }
  Matrix centers(count, x.cols());
  for (int k = 0; k < count; ++k) centers.row(k) = x.row(idx[k]);
  return centers;
}

double estimate_bandwidth(const Matrix& x, numstat::Rng& rng,
                          int subsample_size) {
  const auto n = x.rows();
  if (n < 2) throw std::invalid_argument("estimate_bandwidth: need at least 2 points");
  const int ns = static_cast<int>(std::min<Eigen::Index>(subsample_size, n));
  Matrix sub = select_centers(x, ns, rng);

  double total = 0.0;
  long pairs = 0;
  if (ns <= 2000) {
    for (int i = 0; i < ns; ++i) {
      for (int j = i + 1; j < ns; ++j) {
        total += (sub.row(i) - sub.row(j)).norm();
        ++pairs;
      }
    }
  } else {
    std::uniform_int_distribution<int> pick(0, ns - 1);
    for (int k = 0; k < 5000; ++k) {
      int i = pick(rng);
      int j = pick(rng);
      while (j == i) j = pick(rng);
      total += (sub.row(i) - sub.row(j)).norm();
      ++pairs;
    }
  }
  const double kappa_sq = total / static_cast<double>(pairs);
  if (!(kappa_sq > 0.0)) {
    throw std::domain_error("estimate_bandwidth: degenerate bandwidth");
  }
  return kappa_sq;
}

BasisMap fit_basis(const Matrix& x_raw, int count, numstat::Rng& rng,
                   KernelForm kernel) {
  BasisMap bm;
  bm.standardizer = fit_standardizer(x_raw);
  Matrix xs = bm.standardizer.apply(x_raw);
  bm.centers = select_centers(xs, count, rng);
  bm.kappa_sq = estimate_bandwidth(xs, rng);
  bm.kernel = kernel;
  return bm;
}

}  // namespace mdpreg::basis
