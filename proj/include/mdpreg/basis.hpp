#pragma once

#include "mdpreg/numstat.hpp"
#include "mdpreg/spd.hpp"

namespace mdpreg::basis {

// Per-covariate location/scale fitted on the training set; population sd
// convention (divide by n).
struct Standardizer {
  Vector mean;
  Vector sd;

  Vector apply(const Vector& x) const;
  Matrix apply(const Matrix& x) const;
};

Standardizer fit_standardizer(const Matrix& x);

enum class KernelForm {
  exp_distance,      // exp(-||d|| / (2 kappa^2))
  exp_sq_distance,   // exp(-||d||^2 / (2 kappa^2))
};

// Fixed design map x -> (1, E_1(x), ..., E_N(x)). Centers live in the
// standardized covariate space.
struct BasisMap {
  Matrix centers;  // N x p
  double kappa_sq = 0.0;
  Standardizer standardizer;
  KernelForm kernel = KernelForm::exp_distance;

  int count() const { return static_cast<int>(centers.rows()); }

  // x already standardized
  Vector expand(const Vector& x) const;
  // standardize, then expand
  Vector expand_raw(const Vector& x) const;
  Matrix expand_raw_rows(const Matrix& x) const;
};

// N distinct rows sampled without replacement, in sampled order.
Matrix select_centers(const Matrix& x, int count, numstat::Rng& rng);

// Mean pairwise Euclidean distance over a random subsample of
// min(subsample_size, n) rows; all pairs when the subsample has at most 2000
// rows, otherwise 5000 random pairs.
double estimate_bandwidth(const Matrix& x, numstat::Rng& rng,
                          int subsample_size = 5000);

// standardize -> select centers -> bandwidth, in that order
BasisMap fit_basis(const Matrix& x_raw, int count, numstat::Rng& rng,
                   KernelForm kernel = KernelForm::exp_distance);

}  // namespace mdpreg::basis
