#pragma once

#include <unordered_map>
#include <vector>

#include "mdpreg/predictive.hpp"

namespace mdpreg::regadjust {

struct Neighbors {
  std::vector<long> indices;
  Vector distances;
};

// Exact brute-force k nearest neighbours in Euclidean distance; ties broken
// by lower row index. Operates in the standardized covariate space.
Neighbors knn_search(const Vector& x, const Matrix& rows, int k);

struct AdjustedParticles {
  Matrix particles;  // k x m
  std::vector<long> neighbor_indices;
  Vector distances;
};

// Lazily built predictive mixtures at training covariates, shared across
// many adjustment calls on the same fitted model.
class MixtureCache {
 public:
  MixtureCache(const Matrix& x_raw, const model::VariationalState& s,
               const model::Hyperparameters& h, const basis::BasisMap& bm)
      : x_raw_(x_raw), state_(s), hyper_(h), basis_(bm) {}

  const predictive::PredictiveMixture& at(long row);

 private:
  const Matrix& x_raw_;
  const model::VariationalState& state_;
  const model::Hyperparameters& hyper_;
  const basis::BasisMap& basis_;
  std::unordered_map<long, predictive::PredictiveMixture> cache_;
};

// Quantile transport of each neighbour's response to the target covariate:
// u = F_l(y | x_neighbour), particle_l = F_l^{-1}(u | x*), with u clamped to
// [1e-12, 1-1e-12].
AdjustedParticles adjust_particles(const predictive::PredictiveMixture& target,
                                   const Neighbors& neighbors, const Matrix& y,
                                   MixtureCache& mixtures);

// Component-wise mean (or median) of the k adjusted particles.
Vector predict_adjusted(const Vector& x_raw, const Matrix& x_train_raw,
                        const Matrix& y_train, const model::VariationalState& s,
                        const model::Hyperparameters& h,
                        const basis::BasisMap& bm, int k,
                        bool use_median = false);

}  // namespace mdpreg::regadjust
