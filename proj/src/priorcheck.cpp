#include "mdpreg/priorcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mdpreg::priorcheck {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
}

double Kde::eval(const Vector& x) const {
  const auto n = points.rows();
  const auto d = points.cols();
  double norm = 1.0;
  for (Eigen::Index l = 0; l < d; ++l) norm *= kInvSqrt2Pi / bandwidth(l);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double quad = 0.0;
    for (Eigen::Index l = 0; l < d; ++l) {
      const double z = (x(l) - points(i, l)) / bandwidth(l);
      quad += z * z;
    }
    acc += std::exp(-0.5 * quad);
  }
  return norm * acc / static_cast<double>(n);
}

Vector Kde::eval_rows(const Matrix& x) const {
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out(i) = eval(x.row(i).transpose());
  }
  return out;
}

Kde fit_kde(const Matrix& sample) {
  const auto n = sample.rows();
  const auto d = sample.cols();
  if (n < 2) throw std::invalid_argument("fit_kde: need at least 2 points");
  if (d < 1 || d > 3) throw std::invalid_argument("fit_kde: dimension must be 1..3");
  Kde out;
  out.points = sample;
  out.bandwidth.resize(d);
  const Vector mean = sample.colwise().mean();
  for (Eigen::Index l = 0; l < d; ++l) {
    const double sd = std::sqrt(
        (sample.col(l).array() - mean(l)).square().sum() / static_cast<double>(n));
    if (!(sd > 0.0)) {
      throw std::domain_error("fit_kde: degenerate sample (zero variance)");
    }
    out.bandwidth(l) = 1.06 * sd * std::pow(static_cast<double>(n), -0.2);
  }
  return out;
}

Vector kde(const Matrix& sample, const Matrix& eval_points) {
  return fit_kde(sample).eval_rows(eval_points);
}

Vector conflict_pvalues(const Matrix& adjusted_sample,
                        const Matrix& baseline_sample) {
  if (adjusted_sample.rows() < 2 || baseline_sample.rows() < 1) {
    throw std::invalid_argument("conflict_pvalues: empty sample");
  }
  Kde density = fit_kde(adjusted_sample);
  Vector adj = density.eval_rows(adjusted_sample);
  std::sort(adj.data(), adj.data() + adj.size());

  Vector base = density.eval_rows(baseline_sample);
  Vector out(base.size());
  const double n = static_cast<double>(adj.size());
  for (Eigen::Index j = 0; j < base.size(); ++j) {
    const auto le = std::upper_bound(adj.data(), adj.data() + adj.size(), base(j)) -
                    adj.data();
    out(j) = static_cast<double>(le) / n;
  }
  return out;
}

double weak_informativity_zeta(const Vector& baseline_pvals,
                               const Vector& alt_pvals, double gamma) {
  if (baseline_pvals.size() == 0 || alt_pvals.size() == 0) {
    throw std::invalid_argument("weak_informativity_zeta: empty sample");
  }
  if (!(gamma > 0.0) || !(gamma < 1.0)) {
    throw std::invalid_argument("weak_informativity_zeta: gamma must lie in (0,1)");
  }
  std::vector<double> sorted(baseline_pvals.data(),
                             baseline_pvals.data() + baseline_pvals.size());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  const std::size_t idx = std::min<std::size_t>(
      n - 1, static_cast<std::size_t>(std::ceil(gamma * n)) - 1);
  const double p_gamma = sorted[idx];
  if (!(p_gamma > 0.0)) {
    throw std::domain_error("weak_informativity_zeta: degenerate baseline quantile");
  }
  const double q_gamma =
      (alt_pvals.array() <= p_gamma).count() / static_cast<double>(alt_pvals.size());
  if (q_gamma > p_gamma) return 0.0;
  return 1.0 - q_gamma / p_gamma;
}

ScanResult prior_scan(const Simulator& simulator, const ScanConfig& cfg,
                      const model::VariationalState& s,
                      const model::Hyperparameters& h,
                      const basis::BasisMap& bm, const Matrix& lambda_corpus,
                      const Matrix& stat_corpus) {
  if (cfg.grid.rows() == 0) {
    throw std::invalid_argument("prior_scan: empty grid");
  }
  if (!(cfg.gamma > 0.0) || !(cfg.gamma < 1.0)) {
    throw std::invalid_argument("prior_scan: gamma must lie in (0,1)");
  }

  auto rng = numstat::make_stream(cfg.seed, 7001);
  Matrix baseline(cfg.baseline_count, stat_corpus.cols());
  for (long j = 0; j < cfg.baseline_count; ++j) {
    baseline.row(j) = simulator(cfg.baseline_lambda, rng).transpose();
  }

  Matrix lambda_std = bm.standardizer.apply(lambda_corpus);
  regadjust::MixtureCache mixtures(lambda_corpus, s, h, bm);

  auto adjusted_at = [&](const Vector& lambda) {
    regadjust::Neighbors nb =
        regadjust::knn_search(bm.standardizer.apply(lambda), lambda_std,
                              cfg.k_neighbors);
    auto target = predictive::predictive_mixture(lambda, s, h, bm);
    return regadjust::adjust_particles(target, nb, stat_corpus, mixtures)
        .particles;
  };

  ScanResult out;
  out.baseline_pvalues =
      conflict_pvalues(adjusted_at(cfg.baseline_lambda), baseline);

  out.zeta.resize(cfg.grid.rows());
  out.pvalues.resize(cfg.grid.rows(), cfg.baseline_count);
  for (Eigen::Index g = 0; g < cfg.grid.rows(); ++g) {
    Vector alt = conflict_pvalues(adjusted_at(cfg.grid.row(g).transpose()), baseline);
    out.pvalues.row(g) = alt.transpose();
    out.zeta(g) = weak_informativity_zeta(out.baseline_pvalues, alt, cfg.gamma);
  }
  return out;
}

// ---------------------------------------------------------------------------
// bioassay

namespace {

double penalized_logpost(const Vector& c, const std::array<int, 4>& deaths,
                         const std::array<int, 4>& trials, double prior_sd) {
  double ll = -0.5 * (c(0) * c(0) + c(1) * c(1)) / (prior_sd * prior_sd);
  for (int i = 0; i < 4; ++i) {
    const double eta = c(0) + c(1) * kBioassayDoses[i];
    // y eta - n log(1 + e^eta), stable for either sign of eta
    ll += deaths[i] * eta -
          trials[i] * (std::max(eta, 0.0) + std::log1p(std::exp(-std::abs(eta))));
  }
  return ll;
}

}  // namespace

Vector bioassay_posterior_mode(const std::array<int, 4>& deaths, double prior_sd,
                               const std::array<int, 4>& trials) {
  Vector c = Vector::Zero(2);
  for (int iter = 0; iter < 100; ++iter) {
    Vector grad = -c / (prior_sd * prior_sd);
    Eigen::Matrix2d hess = Eigen::Matrix2d::Identity() * (-1.0 / (prior_sd * prior_sd));
    for (int i = 0; i < 4; ++i) {
      const double x = kBioassayDoses[i];
      const double eta = c(0) + c(1) * x;
      const double p = 1.0 / (1.0 + std::exp(-eta));
      const double w = trials[i] * p * (1.0 - p);
      grad(0) += deaths[i] - trials[i] * p;
      grad(1) += (deaths[i] - trials[i] * p) * x;
      hess(0, 0) -= w;
      hess(0, 1) -= w * x;
      hess(1, 0) -= w * x;
      hess(1, 1) -= w * x * x;
    }
    const double gnorm = grad.lpNorm<Eigen::Infinity>();
    if (gnorm < 1e-10) return c;

    Vector step = -hess.ldlt().solve(grad);
    if (gnorm < 1e-5) {
      // close enough that the objective is flat in double precision; the
      // undamped Newton step is locally contracting
      c += step;
      continue;
    }
    const double f0 = penalized_logpost(c, deaths, trials, prior_sd);
    double scale = 1.0;
    for (int half = 0; half < 40; ++half) {
      Vector trial_c = c + scale * step;
      if (penalized_logpost(trial_c, deaths, trials, prior_sd) > f0 ||
          scale * step.lpNorm<Eigen::Infinity>() < 1e-14) {
        c = trial_c;
        break;
      }
      scale *= 0.5;
    }
  }
  throw std::runtime_error("bioassay_posterior_mode: Newton did not converge");
}

Vector bioassay_statistic(const Vector& mode, bool printed_sign) {
  Vector out(2);
  for (int k = 0; k < 2; ++k) {
    const double x = kBioassayDoses[k + 1];  // x_2, x_3
    const double eta = printed_sign ? (mode(0) - mode(1) * x)   // 1/(1+exp(-c0 + c1 x))
                                    : (mode(0) + mode(1) * x);
    out(k) = 1.0 / (1.0 + std::exp(-eta));
  }
  return out;
}

Vector bioassay_simulate(double sigma0, double sigma1, numstat::Rng& rng,
                         bool printed_sign) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double c0 = sigma0 * gauss(rng);
  const double c1 = sigma1 * gauss(rng);
  std::array<int, 4> deaths{};
  for (int i = 0; i < 4; ++i) {
    const double p = 1.0 / (1.0 + std::exp(-(c0 + c1 * kBioassayDoses[i])));
    std::binomial_distribution<int> bin(kBioassayTrials, p);
    deaths[i] = bin(rng);
  }
  return bioassay_statistic(bioassay_posterior_mode(deaths, 10.0), printed_sign);
}

}  // namespace mdpreg::priorcheck
