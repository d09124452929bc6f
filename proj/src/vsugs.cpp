#include "mdpreg/vsugs.hpp"

#include <cmath>
#include <stdexcept>

namespace mdpreg::vsugs {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kLog2 = 0.6931471805599453094;

struct StepTerms {
  Matrix resid_scatter;   // sum_j q_j r_j r_j^T with r_j = y - beta_new_j^T e
  double design_quad;     // sum_j q_j m e^T V_new_j^{-1} e
};

// Shared body of assimilate_one; returns the residual terms so recompute
// mode can fold them into its accumulators.
StepTerms assimilate_impl(const Vector& y, const Vector& e,
                          const model::Hyperparameters& h, const Vector& probs,
                          model::VariationalState& s, TauRateMode mode,
                          Matrix* resid_accum, double* design_accum) {
  const int t = s.trunc();
  const int m = s.response_dim;
  if (probs.size() != t) {
    throw std::invalid_argument("assimilate: allocation vector must have T entries");
  }
  const double mu_prev = s.exp_tau_inv();

  Matrix s_new = s.sigma_scale.values();
  StepTerms terms{Matrix::Zero(m, m), 0.0};

  std::vector<SpdMatrix> prec_new(t);
  std::vector<Matrix> beta_new(t);
  for (int j = 0; j < t; ++j) {
    const auto& c = s.components[j];
    const double w = mu_prev * probs(j);
    if (w == 0.0) {
      // zero-weight no-op: the component and its S contribution are untouched
      prec_new[j] = c.prec;
      beta_new[j] = c.beta_hat;
      continue;
    }
    prec_new[j] = c.prec.rank_one_update(e, w);
    Matrix rhs = c.prec.multiply(c.beta_hat);
    rhs.noalias() += w * (e * y.transpose());
    beta_new[j] = prec_new[j].solve(rhs);

    s_new.noalias() += w * (y * y.transpose());
    s_new += c.prec.quad(c.beta_hat);
    s_new -= prec_new[j].quad(beta_new[j]);
  }

  s.sigma_dof += 1.0;
  s.sigma_scale = SpdMatrix(s_new);

  for (int j = 0; j < t; ++j) {
    if (probs(j) == 0.0) continue;
    Vector resid = y - beta_new[j].transpose() * e;
    terms.resid_scatter.noalias() += probs(j) * (resid * resid.transpose());
    terms.design_quad += probs(j) * m * prec_new[j].inv_quad(e);
  }

  s.tau.shape += 0.5 * m;
  if (mode == TauRateMode::accumulate) {
    const double resid_quad =
        s.sigma_dof * (s.sigma_scale.solve(terms.resid_scatter)).trace();
    s.tau.rate += 0.5 * (resid_quad + terms.design_quad);
  } else {
    *resid_accum += terms.resid_scatter;
    *design_accum += terms.design_quad;
    const double resid_quad =
        s.sigma_dof * (s.sigma_scale.solve(*resid_accum)).trace();
    s.tau.rate = h.tau_prior.rate + 0.5 * (resid_quad + *design_accum);
  }

  // batch-form omega refresh at the new state
  Vector rate_add = Vector::Zero(s.design_dim());
  for (int j = 0; j < t; ++j) {
    Matrix diff = beta_new[j] - h.component_prior_means[j];
    Matrix w = s.sigma_scale.chol().triangularView<Eigen::Lower>().solve(
        diff.transpose());
    rate_add += s.sigma_dof * w.colwise().squaredNorm().transpose();
    rate_add += m * prec_new[j].inverse_diag();
  }
  for (int k = 0; k < s.design_dim(); ++k) {
    s.omegas[k].shape = h.omega_priors[k].shape + 0.5 * m * t;
    s.omegas[k].rate = h.omega_priors[k].rate + 0.5 * rate_add(k);
  }

  for (int j = 0; j < t; ++j) {
    s.components[j].prec = std::move(prec_new[j]);
    s.components[j].beta_hat = std::move(beta_new[j]);
    s.components[j].mass += probs(j);
  }
  s.seen += 1;
  return terms;
}

}  // namespace

Vector AllocProbs::padded(int trunc) const {
  Vector out = Vector::Zero(trunc);
  out.head(probs.size()) = probs;
  return out;
}

double component_marginal_loglik(const Vector& y, const Vector& e,
                                 const model::VariationalState& s, int j) {
  const int m = s.response_dim;
  const auto& c = s.components[j];
  const double mu = s.exp_tau_inv();
  const double nu = s.sigma_dof;

  SpdMatrix lambda = c.prec.rank_one_update(e, mu);
  Matrix rhs = c.prec.multiply(c.beta_hat);
  rhs.noalias() += mu * (e * y.transpose());
  Matrix beta_tilde = lambda.solve(rhs);

  Matrix d = s.sigma_scale.values();
  d.noalias() += mu * (y * y.transpose());
  d += c.prec.quad(c.beta_hat);
  d -= lambda.quad(beta_tilde);

  // log|Omega_j| = -log|V_j|
  return -0.5 * m * kLog2Pi + 0.5 * m * std::log(mu) -
         0.5 * m * (lambda.logdet() - c.prec.logdet()) +
         0.5 * nu * s.sigma_scale.logdet() +
         numstat::log_mvgamma(m, 0.5 * (nu + 1.0)) -
         numstat::log_mvgamma(m, 0.5 * nu) + 0.5 * m * kLog2 -
         0.5 * (nu + 1.0) * SpdMatrix(d).logdet();
}

AllocProbs alloc_probs(const Vector& y, const Vector& e,
                       const model::VariationalState& s, double alpha) {
  const int t = s.trunc();
  const long i = s.seen + 1;
  AllocProbs out;

  if (i == 1) {
    out.probs = Vector::Zero(1);
    out.probs(0) = 1.0;
    out.log_prior_weights = Vector::Zero(1);
    out.log_marginals = Vector::Zero(1);
    out.log_marginals(0) = component_marginal_loglik(y, e, s, 0);
    return out;
  }

  const int occupied = static_cast<int>(std::min<long>(i - 1, t));
  const int candidates = static_cast<int>(std::min<long>(i, t));
  const double denom = alpha + static_cast<double>(i) - 1.0;

  out.log_prior_weights.resize(candidates);
  out.log_marginals.resize(candidates);
  for (int j = 0; j < occupied; ++j) {
    out.log_prior_weights(j) =
        std::log((s.components[j].mass + alpha / t) / denom);
  }
  if (candidates > occupied) {
    out.log_prior_weights(occupied) =
        std::log(alpha * (1.0 - static_cast<double>(occupied) / t) / denom);
  }
  for (int j = 0; j < candidates; ++j) {
    out.log_marginals(j) = component_marginal_loglik(y, e, s, j);
  }

  Vector logw = out.log_prior_weights + out.log_marginals;
  const double top = logw.maxCoeff();
  Vector w = (logw.array() - top).exp();
  out.probs = w / w.sum();
  return out;
}

void assimilate_one(const Vector& y, const Vector& e,
                    const model::Hyperparameters& h, const Vector& probs,
                    model::VariationalState& s) {
  assimilate_impl(y, e, h, probs, s, TauRateMode::accumulate, nullptr, nullptr);
}

OnlineFitter::OnlineFitter(const model::Hyperparameters& h, TauRateMode mode)
    : hyper_(h), state_(model::init_state(h)), mode_(mode) {
  resid_scatter_ = Matrix::Zero(state_.response_dim, state_.response_dim);
}

void OnlineFitter::seed_from_batch(const batchvb::FitResult& warm,
                                   const Matrix& y, const Matrix& designs) {
  state_ = warm.state;
  state_.seen = y.rows();
  for (int j = 0; j < state_.trunc(); ++j) {
    state_.components[j].mass = warm.alloc.col(j).sum();
  }
  if (mode_ == TauRateMode::recompute) {
    // rebuild the residual accumulators the recompute rule expects
    resid_scatter_.setZero();
    design_quad_sum_ = 0.0;
    const int m = state_.response_dim;
    for (int j = 0; j < state_.trunc(); ++j) {
      const auto& c = state_.components[j];
      Matrix resid = y - designs * c.beta_hat;  // n x m
      Matrix weighted = warm.alloc.col(j).asDiagonal() * resid;
      resid_scatter_.noalias() += resid.transpose() * weighted;
      Matrix z = c.prec.chol().triangularView<Eigen::Lower>().solve(
          designs.transpose());
      design_quad_sum_ +=
          m * warm.alloc.col(j).dot(z.colwise().squaredNorm().transpose());
    }
  }
}

AllocProbs OnlineFitter::step(const Vector& y, const Vector& e) {
  AllocProbs alloc = alloc_probs(y, e, state_, hyper_.alpha);
  assimilate_impl(y, e, hyper_, alloc.padded(state_.trunc()), state_, mode_,
                  &resid_scatter_, &design_quad_sum_);
  return alloc;
}

OnlineResult fit_online_designs(const Matrix& designs, const Matrix& y,
                                const model::Hyperparameters& h,
                                const Options& opts) {
  const auto n = y.rows();
  if (opts.warm_count > n) {
    throw std::invalid_argument("fit_online: warm count exceeds available rows");
  }

  OnlineFitter fitter(h, opts.tau_mode);
  OnlineResult out;
  if (opts.keep_alloc_history) out.alloc_history = Matrix::Zero(n, h.trunc);

  if (opts.warm_count > 0) {
    batchvb::Options warm_opts;
    warm_opts.max_iter = opts.warm_max_iter;
    warm_opts.tol = opts.warm_tol;
    warm_opts.seed = opts.seed;
    auto warm = batchvb::fit_batch(y.topRows(opts.warm_count),
                                   designs.topRows(opts.warm_count), h, warm_opts);
    out.warm_diagnostics = warm.diagnostics;
    if (opts.keep_alloc_history) {
      out.alloc_history.topRows(opts.warm_count) = warm.alloc;
    }
    fitter.seed_from_batch(warm, y.topRows(opts.warm_count),
                           designs.topRows(opts.warm_count));
  }

  for (Eigen::Index i = opts.warm_count; i < n; ++i) {
    AllocProbs alloc = fitter.step(y.row(i).transpose(), designs.row(i).transpose());
    if (opts.keep_alloc_history) {
      out.alloc_history.row(i) = alloc.padded(h.trunc).transpose();
    }
  }
  out.state = fitter.state();
  return out;
}

OnlineResult fit_online(const Matrix& x_raw, const Matrix& y,
                        const model::Hyperparameters& h,
                        const basis::BasisMap& bm, const Options& opts) {
  return fit_online_designs(bm.expand_raw_rows(x_raw), y, h, opts);
}

}  // namespace mdpreg::vsugs
