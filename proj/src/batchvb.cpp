#include "mdpreg/batchvb.hpp"

#include <cmath>
#include <stdexcept>

namespace mdpreg::batchvb {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kLog2 = 0.6931471805599453094;

double rel_change(double prev, double next) {
  return std::abs(next - prev) / (1.0 + std::abs(prev));
}

double max_rel_change(const model::VariationalState& prev,
                      const model::VariationalState& next,
                      const Matrix& q_prev, const Matrix& q_next) {
  double c = 0.0;
  for (std::size_t j = 0; j < prev.components.size(); ++j) {
    c = std::max(c, ((next.components[j].beta_hat - prev.components[j].beta_hat)
                         .cwiseAbs()
                         .array() /
                     (1.0 + prev.components[j].beta_hat.cwiseAbs().array()))
                        .maxCoeff());
    c = std::max(c, ((next.components[j].prec.chol() - prev.components[j].prec.chol())
                         .cwiseAbs()
                         .array() /
                     (1.0 + prev.components[j].prec.chol().cwiseAbs().array()))
                        .maxCoeff());
  }
  c = std::max(c, ((next.sigma_scale.chol() - prev.sigma_scale.chol())
                       .cwiseAbs()
                       .array() /
                   (1.0 + prev.sigma_scale.chol().cwiseAbs().array()))
                      .maxCoeff());
  c = std::max(c, rel_change(prev.tau.shape, next.tau.shape));
  c = std::max(c, rel_change(prev.tau.rate, next.tau.rate));
  for (std::size_t k = 0; k < prev.omegas.size(); ++k) {
    c = std::max(c, rel_change(prev.omegas[k].shape, next.omegas[k].shape));
    c = std::max(c, rel_change(prev.omegas[k].rate, next.omegas[k].rate));
  }
  if (q_prev.size() > 0) {
    c = std::max(c, (q_next - q_prev).cwiseAbs().maxCoeff());
  }
  return c;
}

}  // namespace

AllocationTable random_one_hot_init(long n, int trunc, numstat::Rng& rng) {
  AllocationTable q = Matrix::Zero(n, trunc);
  for (long i = 0; i < n; ++i) {
    const int candidates = static_cast<int>(std::min<long>(i + 1, trunc));
    std::uniform_int_distribution<int> pick(0, candidates - 1);
    q(i, pick(rng)) = 1.0;
  }
  return q;
}

void update_global(const Matrix& y, const Matrix& designs,
                   const AllocationTable& alloc,
                   const model::Hyperparameters& h, model::VariationalState& s) {
  const auto n = y.rows();
  const int t = h.trunc;
  const double exp_tau_inv = s.exp_tau_inv();
  const Vector exp_omega_inv = s.exp_omega_inv();

  Matrix s_hat = h.sigma_scale.values();
  // each y_i enters the scatter exactly once because the rows of alloc sum to 1
  s_hat.noalias() += exp_tau_inv * (y.transpose() * y);

  for (int j = 0; j < t; ++j) {
    Matrix prior_prec = h.component_prior_precs[j];
    prior_prec.diagonal() += exp_omega_inv;

    Matrix v = prior_prec;
    Matrix rhs = prior_prec * h.component_prior_means[j];
    if (n > 0) {
      Matrix weighted = alloc.col(j).asDiagonal() * designs;
      v.noalias() += exp_tau_inv * (designs.transpose() * weighted);
      rhs.noalias() += exp_tau_inv * (weighted.transpose() * y);
    }
    s.components[j].prec = SpdMatrix(v);
    s.components[j].beta_hat = s.components[j].prec.solve(rhs);

    s_hat.noalias() +=
        h.component_prior_means[j].transpose() * prior_prec * h.component_prior_means[j];
    s_hat.noalias() -= s.components[j].prec.quad(s.components[j].beta_hat);
  }

  s.sigma_dof = h.sigma_dof + static_cast<double>(n);
  s.sigma_scale = SpdMatrix(s_hat);
}

void update_tau(const Matrix& y, const Matrix& designs,
                const AllocationTable& alloc, const model::Hyperparameters& h,
                model::VariationalState& s) {
  const auto n = y.rows();
  const int m = s.response_dim;

  double rate = h.tau_prior.rate;
  for (int j = 0; j < h.trunc; ++j) {
    if (n == 0) break;
    Matrix resid = y - designs * s.components[j].beta_hat;  // n x m
    Matrix w = s.sigma_scale.chol().triangularView<Eigen::Lower>().solve(
        resid.transpose());  // m x n
    Vector sigma_quad = s.sigma_dof * w.colwise().squaredNorm().transpose();
    Matrix z = s.components[j].prec.chol().triangularView<Eigen::Lower>().solve(
        designs.transpose());  // d x n
    Vector design_quad = z.colwise().squaredNorm().transpose();
    rate += 0.5 * alloc.col(j).dot(sigma_quad + m * design_quad);
  }
  s.tau.shape = h.tau_prior.shape + 0.5 * static_cast<double>(n) * m;
  s.tau.rate = rate;
}

void update_omega(const model::Hyperparameters& h, model::VariationalState& s) {
  const int d = h.design_dim();
  const int m = s.response_dim;

  Vector rate_add = Vector::Zero(d);
  for (int j = 0; j < h.trunc; ++j) {
    Matrix diff = s.components[j].beta_hat - h.component_prior_means[j];  // d x m
    Matrix w = s.sigma_scale.chol().triangularView<Eigen::Lower>().solve(
        diff.transpose());  // m x d
    rate_add += s.sigma_dof * w.colwise().squaredNorm().transpose();
    rate_add += m * s.components[j].prec.inverse_diag();
  }
  for (int k = 0; k < d; ++k) {
    s.omegas[k].shape = h.omega_priors[k].shape + 0.5 * m * h.trunc;
    s.omegas[k].rate = h.omega_priors[k].rate + 0.5 * rate_add(k);
  }
}

AllocationTable update_delta(const Matrix& y, const Matrix& designs,
                             const AllocationTable& alloc_prev,
                             const model::Hyperparameters& h,
                             const model::VariationalState& s) {
  const auto n = y.rows();
  const int t = h.trunc;
  const int m = s.response_dim;

  // j-independent part of E_q{log p(y_i | theta_j)}
  const double shared = -0.5 * m * kLog2Pi -
                        0.5 * m * (std::log(s.tau.rate) - numstat::digamma(s.tau.shape)) +
                        0.5 * numstat::mv_digamma(m, 0.5 * s.sigma_dof) +
                        0.5 * m * kLog2 - 0.5 * s.sigma_scale.logdet();
  const double exp_tau_inv = s.exp_tau_inv();

  Matrix loglik(n, t);
  for (int j = 0; j < t; ++j) {
    Matrix resid = y - designs * s.components[j].beta_hat;
    Matrix w = s.sigma_scale.chol().triangularView<Eigen::Lower>().solve(
        resid.transpose());
    Vector sigma_quad = s.sigma_dof * w.colwise().squaredNorm().transpose();
    Matrix z = s.components[j].prec.chol().triangularView<Eigen::Lower>().solve(
        designs.transpose());
    Vector design_quad = z.colwise().squaredNorm().transpose();
    loglik.col(j) =
        shared - 0.5 * exp_tau_inv * (sigma_quad + m * design_quad).array();
  }

  Vector mass = alloc_prev.colwise().sum().transpose();
  const double denom = h.alpha + static_cast<double>(n) - 1.0;

  AllocationTable q = Matrix::Zero(n, t);
  for (long i = 0; i < n; ++i) {
    const int candidates = static_cast<int>(std::min<long>(i + 1, t));
    Vector logw(candidates);
    for (int j = 0; j < candidates; ++j) {
      const double occupied = mass(j) - alloc_prev(i, j) + h.alpha / t;
      logw(j) = std::log(occupied / denom) + loglik(i, j);
    }
    const double top = logw.maxCoeff();
    if (!std::isfinite(top)) {
      throw std::domain_error("update_delta: allocation row degenerate");
    }
    Vector w = (logw.array() - top).exp();
    q.row(i).head(candidates) = (w / w.sum()).transpose();
  }
  return q;
}

FitResult fit_batch(const Matrix& y, const Matrix& designs,
                    const model::Hyperparameters& h, const Options& opts) {
  const auto n = y.rows();
  if (designs.rows() != n) {
    throw std::invalid_argument("fit_batch: design/response row mismatch");
  }
  if (designs.cols() != h.design_dim()) {
    throw std::invalid_argument("fit_batch: design width != basisCount+1");
  }

  FitResult out;
  out.state = model::init_state(h);
  out.state.seen = n;

  auto rng = numstat::make_rng(opts.seed);
  out.alloc = random_one_hot_init(n, h.trunc, rng);
  for (int j = 0; j < h.trunc; ++j) {
    out.state.components[j].mass = out.alloc.col(j).sum();
  }

  for (int sweep = 0; sweep < opts.max_iter; ++sweep) {
    model::VariationalState prev = out.state;
    Matrix q_prev = out.alloc;

    update_global(y, designs, out.alloc, h, out.state);
    update_tau(y, designs, out.alloc, h, out.state);
    update_omega(h, out.state);
    if (n > 0) {
      out.alloc = update_delta(y, designs, out.alloc, h, out.state);
      for (int j = 0; j < h.trunc; ++j) {
        out.state.components[j].mass = out.alloc.col(j).sum();
      }
    }

    const double change = max_rel_change(prev, out.state, q_prev, out.alloc);
    out.diagnostics.sweep_max_change.push_back(change);
    if (change < opts.tol) {
      out.diagnostics.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace mdpreg::batchvb
