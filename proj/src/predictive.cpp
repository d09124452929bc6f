#include "mdpreg/predictive.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <stdexcept>

namespace mdpreg::predictive {

namespace {

Component build_component(const Vector& e, const model::VariationalState& s,
                          int j) {
  const int m = s.response_dim;
  const auto& c = s.components[j];
  const double mu = s.exp_tau_inv();

  Component out;
  out.tail_exponent = s.sigma_dof + 1.0;
  out.marginal_dof = out.tail_exponent - m;

  out.lambda = c.prec.rank_one_update(e, mu);
  Vector lambda_inv_e = out.lambda.solve(e);
  const double g = 1.0 - mu * e.dot(lambda_inv_e);  // in (0,1)

  Matrix v_beta = c.prec.multiply(c.beta_hat);  // V beta, d x m
  out.s_star = s.sigma_scale.values();
  out.s_star += c.prec.quad(c.beta_hat);
  out.s_star -= v_beta.transpose() * out.lambda.solve(v_beta);
  SpdMatrix s_star(out.s_star);

  Vector vb = v_beta.transpose() * lambda_inv_e;  // beta^T V Lambda^{-1} E
  out.a_mat = mu * g * s_star.inverse();
  out.b_vec = -2.0 * mu * s_star.solve(vb);

  out.location = vb / g;
  const double factor = 1.0 - (mu / g) * vb.dot(s_star.solve(vb));
  if (!(factor > 0.0)) {
    throw std::domain_error("predictive_mixture: degenerate shape for component " +
                            std::to_string(j + 1));
  }
  // Completing the square in y0 turns the determinant argument into the
  // rank-one form (S_* - (mu/g) vb vb^T) + mu g (y0-loc)(y0-loc)^T, so the
  // t shape matrix is mu g times the inverse of that corrected scale.
  Matrix scale_mat = out.s_star - (mu / g) * (vb * vb.transpose());
  SpdMatrix corrected(scale_mat);
  out.shape = SpdMatrix(mu * g * corrected.inverse());

  out.marginal_scale.resize(m);
  for (int l = 0; l < m; ++l) {
    out.marginal_scale(l) =
        std::sqrt(scale_mat(l, l) / (mu * g * out.marginal_dof));
  }
  return out;
}

}  // namespace

PredictiveMixture predictive_mixture_from_design(const Vector& e,
                                                 const model::VariationalState& s,
                                                 const model::Hyperparameters& h) {
  if (s.seen < 1) {
    throw std::invalid_argument("predictive_mixture: state has seen no data");
  }
  const int t = s.trunc();
  const long n = s.seen;
  const int occupied = static_cast<int>(std::min<long>(n, t));
  const double denom = h.alpha + static_cast<double>(n);

  PredictiveMixture mix;
  mix.dim = s.response_dim;
  mix.components.resize(t);
  for (int j = 0; j < t; ++j) {
    mix.components[j] = build_component(e, s, j);
    if (j < occupied) {
      mix.components[j].weight = (s.components[j].mass + h.alpha / t) / denom;
    } else if (j == occupied) {
      mix.components[j].weight =
          h.alpha * (1.0 - static_cast<double>(occupied) / t) / denom;
    } else {
      mix.components[j].weight = 0.0;
    }
  }
  return mix;
}

PredictiveMixture predictive_mixture(const Vector& x_raw,
                                     const model::VariationalState& s,
                                     const model::Hyperparameters& h,
                                     const basis::BasisMap& bm) {
  return predictive_mixture_from_design(bm.expand_raw(x_raw), s, h);
}

double predictive_logpdf(const Vector& y, const PredictiveMixture& mix) {
  double top = -std::numeric_limits<double>::infinity();
  std::vector<double> logs;
  logs.reserve(mix.components.size());
  for (const auto& c : mix.components) {
    if (c.weight <= 0.0) continue;
    const double l = std::log(c.weight) +
                     numstat::mvt_logpdf(y, c.location, c.shape, c.tail_exponent);
    logs.push_back(l);
    top = std::max(top, l);
  }
  double acc = 0.0;
  for (double l : logs) acc += std::exp(l - top);
  return top + std::log(acc);
}

Vector predictive_mean(const PredictiveMixture& mix) {
  Vector mean = Vector::Zero(mix.dim);
  for (const auto& c : mix.components) {
    if (c.weight <= 0.0) continue;
    if (!(c.marginal_dof > 1.0)) {
      throw std::domain_error("predictive_mean: tail exponent too small for a mean");
    }
    mean += c.weight * c.location;
  }
  return mean;
}

double marginal_cdf(const PredictiveMixture& mix, int dim, double v) {
  double acc = 0.0;
  for (const auto& c : mix.components) {
    if (c.weight <= 0.0) continue;
    boost::math::students_t_distribution<double> t(c.marginal_dof);
    acc += c.weight *
           boost::math::cdf(t, (v - c.location(dim)) / c.marginal_scale(dim));
  }
  return acc;
}

double marginal_quantile(const PredictiveMixture& mix, int dim, double u) {
  if (!(u > 0.0) || !(u < 1.0)) {
    throw std::invalid_argument("marginal_quantile: u must lie in (0,1)");
  }
  double center = 0.0;
  double scale = 0.0;
  for (const auto& c : mix.components) {
    if (c.weight <= 0.0) continue;
    center += c.weight * c.location(dim);
    scale = std::max(scale, c.marginal_scale(dim));
  }

  double lo = center - 50.0 * scale;
  double hi = center + 50.0 * scale;
  double span = 50.0 * scale;
  while (marginal_cdf(mix, dim, lo) > u) {
    span *= 2.0;
    lo = center - span;
  }
  span = 50.0 * scale;
  while (marginal_cdf(mix, dim, hi) < u) {
    span *= 2.0;
    hi = center + span;
  }

  double mid = 0.5 * (lo + hi);
  for (int iter = 0; iter < 400; ++iter) {
    mid = 0.5 * (lo + hi);
    const double f = marginal_cdf(mix, dim, mid);
    if (std::abs(f - u) < 1e-10) return mid;
    if (f < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return mid;
}

}  // namespace mdpreg::predictive
