#pragma once

#include "mdpreg/model.hpp"

namespace mdpreg::elbo {

// Per-step contribution to the recursive variational lower bound. The
// allocation-prior term (sum_j q_j log r_ij) is part of the displayed bound
// and is reported alongside the entropy.
struct BoundBreakdown {
  double tau_term = 0.0;
  double sigma_term = 0.0;
  Vector omega_terms;  // N+1
  Vector beta_terms;   // T
  double likelihood_term = 0.0;
  double alloc_prior_term = 0.0;
  double entropy_term = 0.0;
  double total = 0.0;
};

// Evaluates the recursive bound step between two consecutive states of one
// assimilation. probs and log_prior_weights are over the full T components;
// zero-probability entries contribute nothing (0 log 0 = 0).
BoundBreakdown step_lower_bound(const Vector& y, const Vector& e,
                                const model::VariationalState& prev,
                                const model::VariationalState& next,
                                const Vector& probs,
                                const Vector& log_prior_weights);

}  // namespace mdpreg::elbo
