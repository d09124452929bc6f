#pragma once

#include "mdpreg/basis.hpp"
#include "mdpreg/model.hpp"

namespace mdpreg::predictive {

// One multivariate-t component of the posterior predictive mixture, carried
// in the exponent form |1 + (y-loc)^T shape (y-loc)|^{-tail/2}.
struct Component {
  double weight = 0.0;
  Vector location;
  SpdMatrix shape;
  double tail_exponent = 0.0;

  double marginal_dof = 0.0;  // tail_exponent - m
  Vector marginal_scale;      // univariate-t scale per response dimension

  // intermediates kept for diagnostics
  SpdMatrix lambda;
  Matrix s_star;
  Matrix a_mat;
  Vector b_vec;
};

struct PredictiveMixture {
  std::vector<Component> components;
  int dim = 0;
};

PredictiveMixture predictive_mixture(const Vector& x_raw,
                                     const model::VariationalState& s,
                                     const model::Hyperparameters& h,
                                     const basis::BasisMap& bm);

// Same construction from an already-expanded design vector.
PredictiveMixture predictive_mixture_from_design(const Vector& e,
                                                 const model::VariationalState& s,
                                                 const model::Hyperparameters& h);

double predictive_logpdf(const Vector& y, const PredictiveMixture& mix);
Vector predictive_mean(const PredictiveMixture& mix);

// Marginal distribution function of response dimension `dim`, a weighted sum
// of univariate t CDFs.
double marginal_cdf(const PredictiveMixture& mix, int dim, double v);

// Inverse of marginal_cdf by bracketed bisection to 1e-10 in probability.
double marginal_quantile(const PredictiveMixture& mix, int dim, double u);

}  // namespace mdpreg::predictive
