#include "mdpreg/regadjust.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mdpreg::regadjust {

Neighbors knn_search(const Vector& x, const Matrix& rows, int k) {
  const auto n = rows.rows();
  if (k < 1 || k > n) {
    throw std::invalid_argument("knn_search: k out of range");
  }
  std::vector<std::pair<double, long>> dist(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    dist[i] = {(rows.row(i).transpose() - x).norm(), static_cast<long>(i)};
  }
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());

  Neighbors out;
  out.indices.reserve(k);
  out.distances.resize(k);
  for (int r = 0; r < k; ++r) {
    out.indices.push_back(dist[r].second);
    out.distances(r) = dist[r].first;
  }
  return out;
}

const predictive::PredictiveMixture& MixtureCache::at(long row) {
  auto it = cache_.find(row);
  if (it == cache_.end()) {
    it = cache_
             .emplace(row, predictive::predictive_mixture(
                               x_raw_.row(row).transpose(), state_, hyper_, basis_))
             .first;
  }
  return it->second;
}

AdjustedParticles adjust_particles(const predictive::PredictiveMixture& target,
                                   const Neighbors& neighbors, const Matrix& y,
                                   MixtureCache& mixtures) {
  const int k = static_cast<int>(neighbors.indices.size());
  const int m = static_cast<int>(y.cols());

  AdjustedParticles out;
  out.neighbor_indices = neighbors.indices;
  out.distances = neighbors.distances;
  out.particles.resize(k, m);
  for (int r = 0; r < k; ++r) {
    const long i = neighbors.indices[r];
    const auto& source = mixtures.at(i);
    for (int l = 0; l < m; ++l) {
      double u = predictive::marginal_cdf(source, l, y(i, l));
      u = std::clamp(u, 1e-12, 1.0 - 1e-12);
      out.particles(r, l) = predictive::marginal_quantile(target, l, u);
    }
  }
  return out;
}

Vector predict_adjusted(const Vector& x_raw, const Matrix& x_train_raw,
                        const Matrix& y_train, const model::VariationalState& s,
                        const model::Hyperparameters& h,
                        const basis::BasisMap& bm, int k, bool use_median) {
  Matrix x_std = bm.standardizer.apply(x_train_raw);
  Neighbors nb = knn_search(bm.standardizer.apply(x_raw), x_std, k);
  MixtureCache cache(x_train_raw, s, h, bm);
  auto target = predictive::predictive_mixture(x_raw, s, h, bm);
  AdjustedParticles particles = adjust_particles(target, nb, y_train, cache);

  if (!use_median) {
    return particles.particles.colwise().mean();
  }
  Vector out(y_train.cols());
  for (Eigen::Index l = 0; l < y_train.cols(); ++l) {
    std::vector<double> col(particles.particles.rows());
    for (Eigen::Index r = 0; r < particles.particles.rows(); ++r) {
      col[r] = particles.particles(r, l);
    }
    std::nth_element(col.begin(), col.begin() + col.size() / 2, col.end());
    double hi = col[col.size() / 2];
    if (col.size() % 2 == 0) {
      std::nth_element(col.begin(), col.begin() + col.size() / 2 - 1, col.end());
      out(l) = 0.5 * (hi + col[col.size() / 2 - 1]);
    } else {
      out(l) = hi;
    }
  }
  return out;
}

}  // namespace mdpreg::regadjust
