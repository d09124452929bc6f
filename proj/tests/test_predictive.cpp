#include <doctest.h>

#include <cmath>

#include "mdpreg/predictive.hpp"
#include "mdpreg/vsugs.hpp"
#include "support/oracles.hpp"

using namespace mdpreg;
using namespace mdpreg::predictive;

namespace {

struct Fitted {
  model::Hyperparameters hyper;
  basis::BasisMap basis;
  model::VariationalState state;
  Matrix x;
  Matrix y;
};

// m=2, N=2, T=2 online fit on two-regime data
Fitted small_fit(long n = 200, std::uint64_t seed = 9) {
  Fitted out;
  auto rng = numstat::make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  out.x.resize(n, 2);
  out.y.resize(n, 2);
  for (long i = 0; i < n; ++i) {
    out.x(i, 0) = 2.0 * unif(rng) - 1.0;
    out.x(i, 1) = 2.0 * unif(rng) - 1.0;
    const double flip = unif(rng) < 0.5 ? 1.0 : -1.0;
    out.y(i, 0) = flip * (1.0 + 0.8 * out.x(i, 0)) + 0.15 * gauss(rng);
    out.y(i, 1) = -flip * 0.5 * out.x(i, 1) + 0.15 * gauss(rng);
  }
  out.hyper = model::default_hyperparameters(2, 2, 2, 1.5);
  out.basis = basis::fit_basis(out.x, 2, rng);
  vsugs::Options opts;
  opts.warm_count = 50;
  opts.seed = seed;
  out.state = vsugs::fit_online(out.x, out.y, out.hyper, out.basis, opts).state;
  return out;
}

// Monte Carlo estimate of the predictive mixture density. The closed form
// applies the tau plug-in, so the matching oracle integrates (beta, Sigma) at
// 1/tau = E(tau^{-1}); sample_tau = true instead draws tau from q(tau), which
// exposes the plug-in gap as a diagnostic.
double mixture_pdf_mc(const Vector& y0, const Vector& e0,
                      const model::VariationalState& s,
                      const model::Hyperparameters& h, long draws,
                      std::uint64_t seed, double* se_out,
                      bool sample_tau = false) {
  auto mix = predictive_mixture_from_design(e0, s, h);
  auto rng = numstat::make_rng(seed);
  const double tau_plug = 1.0 / s.exp_tau_inv();
  double total = 0.0;
  double total_var = 0.0;
  for (std::size_t j = 0; j < mix.components.size(); ++j) {
    const double w = mix.components[j].weight;
    if (w <= 0.0) continue;
    Matrix vinv = s.components[j].prec.inverse();
    numstat::InvWishartParams iw{s.sigma_dof, s.sigma_scale};
    auto stats = oracles::mc_scalar_mean(
        [&] {
          const double tau =
              sample_tau ? numstat::sample_inverse_gamma(s.tau, rng) : tau_plug;
          Matrix sigma = numstat::sample_inverse_wishart(iw, rng);
          numstat::MatrixNormalParams mn;
          mn.mean = s.components[j].beta_hat;
          mn.row_cov = SpdMatrix(vinv);
          mn.col_cov = SpdMatrix(sigma);
          Matrix beta = numstat::sample_matrix_normal(mn, rng);
          Vector mean = beta.transpose() * e0;
          return std::exp(
              oracles::dense_mvn_logpdf(y0, mean, Matrix(tau * sigma)));
        },
        draws);
    total += w * stats.mean;
    total_var += w * w * stats.standard_error * stats.standard_error;
  }
  if (se_out) *se_out = std::sqrt(total_var);
  return total;
}

}  // namespace

TEST_CASE("mixture weights: occupied case sums to one via the urn") {
  auto f = small_fit();
  Vector x0(2);
  x0 << 0.2, -0.3;
  auto mix = predictive_mixture(x0, f.state, f.hyper, f.basis);
  double total_w = 0.0;
  double total_mass = 0.0;
  for (const auto& c : mix.components) total_w += c.weight;
  for (const auto& c : f.state.components) total_mass += c.mass;
  CHECK(total_w == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(total_w ==
        doctest::Approx((total_mass + f.hyper.alpha) /
                        (f.hyper.alpha + double(f.state.seen)))
            .epsilon(1e-10));
}

TEST_CASE("mixture weights: unoccupied slots get the new-cluster weight") {
  auto h = model::default_hyperparameters(1, 0, 5, 2.0);
  vsugs::OnlineFitter fitter(h);
  Vector e = Vector::Ones(1);
  for (double yv : {0.4, 0.6}) {
    Vector y(1);
    y << yv;
    fitter.step(y, e);
  }
  auto mix = predictive_mixture_from_design(e, fitter.state(), h);
  // n=2 < T=5: occupied expressions on 1..2, new-cluster weight on slot 3
  const double denom = h.alpha + 2.0;
  CHECK(mix.components[2].weight ==
        doctest::Approx(h.alpha * (1.0 - 2.0 / 5.0) / denom).epsilon(1e-12));
  CHECK(mix.components[3].weight == 0.0);
  CHECK(mix.components[4].weight == 0.0);
  double total = 0.0;
  for (const auto& c : mix.components) total += c.weight;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("three algebraic routes to the component density agree") {
  auto f = small_fit();
  auto rng = numstat::make_rng(44);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double mu = f.state.exp_tau_inv();
  const double nu = f.state.sigma_dof;
  const int m = 2;

  for (int rep = 0; rep < 25; ++rep) {
    Vector x0(2), y0(2);
    x0 << gauss(rng), gauss(rng);
    y0 << gauss(rng), gauss(rng);
    Vector e0 = f.basis.expand_raw(x0);
    auto mix = predictive_mixture_from_design(e0, f.state, f.hyper);

    for (int j = 0; j < 2; ++j) {
      // route 1: the allocation-integral form, full determinant by Cholesky
      const double direct =
          vsugs::component_marginal_loglik(y0, e0, f.state, j);

      // route 2: determinant lemma on the completed-square rank-one form
      const auto& c = mix.components[j];
      const auto& comp = f.state.components[j];
      const double constant =
          -0.5 * m * std::log(2.0 * M_PI / mu) -
          0.5 * m * (c.lambda.logdet() - comp.prec.logdet()) +
          0.5 * nu * f.state.sigma_scale.logdet() +
          numstat::log_mvgamma(m, 0.5 * (nu + 1.0)) -
          numstat::log_mvgamma(m, 0.5 * nu) + 0.5 * m * std::log(2.0);
      Vector lambda_inv_e = c.lambda.solve(e0);
      const double g = 1.0 - mu * e0.dot(lambda_inv_e);
      Vector u = (comp.prec.multiply(comp.beta_hat)).transpose() * lambda_inv_e;
      Matrix scale = c.s_star - (mu / g) * (u * u.transpose());
      SpdMatrix scale_spd(scale);
      Vector d = y0 - u / g;
      const double lemma_route =
          constant -
          0.5 * (nu + 1.0) *
              (scale_spd.logdet() + std::log1p(mu * g * scale_spd.inv_quad(d)));

      // route 3: the normalized t-density form
      const double t_route =
          numstat::mvt_logpdf(y0, c.location, c.shape, c.tail_exponent);

      CHECK(direct == doctest::Approx(t_route).epsilon(1e-8));
      CHECK(lemma_route == doctest::Approx(t_route).epsilon(1e-8));
    }
  }
}

TEST_CASE("predictive density matches the Monte Carlo integral") {
  auto f = small_fit();
  auto rng = numstat::make_rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int probe = 0; probe < 3; ++probe) {
    Vector x0(2), y0(2);
    x0 << 0.5 * gauss(rng), 0.5 * gauss(rng);
    y0 << gauss(rng), gauss(rng);
    Vector e0 = f.basis.expand_raw(x0);
    auto mix = predictive_mixture_from_design(e0, f.state, f.hyper);
    const double ours = std::exp(predictive_logpdf(y0, mix));
    double se = 0.0;
    const double mc =
        mixture_pdf_mc(y0, e0, f.state, f.hyper, 200000, 1000 + probe, &se);
    CHECK(std::abs(ours - mc) < 3.0 * se);

    // the tau plug-in gap is a diagnostic; it widens in the tails but stays
    // modest on the log scale for a concentrated q(tau)
    double se_full = 0.0;
    const double mc_full = mixture_pdf_mc(y0, e0, f.state, f.hyper, 100000,
                                          2000 + probe, &se_full, true);
    CHECK(std::abs(std::log(ours) - std::log(mc_full)) < 0.25);
  }
}

TEST_CASE("negating the fitted coefficients mirrors the locations") {
  auto f = small_fit();
  Vector x0(2);
  x0 << 0.4, 0.1;
  auto mix = predictive_mixture(x0, f.state, f.hyper, f.basis);
  auto flipped_state = f.state;
  for (auto& c : flipped_state.components) c.beta_hat = -c.beta_hat;
  auto flipped = predictive_mixture(x0, flipped_state, f.hyper, f.basis);
  for (std::size_t j = 0; j < mix.components.size(); ++j) {
    CHECK((mix.components[j].location + flipped.components[j].location)
              .isZero(0.0));
    CHECK((mix.components[j].shape.chol() - flipped.components[j].shape.chol())
              .isZero(0.0));
  }
}

TEST_CASE("predictive mean and logpdf basics") {
  auto f = small_fit();
  Vector x0(2);
  x0 << -0.2, 0.6;
  auto mix = predictive_mixture(x0, f.state, f.hyper, f.basis);

  Vector mean = predictive_mean(mix);
  Vector by_hand = Vector::Zero(2);
  for (const auto& c : mix.components) by_hand += c.weight * c.location;
  CHECK((mean - by_hand).isZero(0.0));

  for (double yv : {-50.0, 0.0, 3.0, 80.0}) {
    Vector y0(2);
    y0 << yv, -yv;
    CHECK(std::isfinite(predictive_logpdf(y0, mix)));
  }

  // single component: mean is its location
  PredictiveMixture single;
  single.dim = 2;
  single.components.push_back(mix.components[0]);
  single.components[0].weight = 1.0;
  CHECK((predictive_mean(single) - single.components[0].location).isZero(0.0));
}

TEST_CASE("one-dimensional predictive density integrates to one") {
  auto rng = numstat::make_rng(15);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix x(120, 1), y(120, 1);
  for (int i = 0; i < 120; ++i) {
    x(i, 0) = gauss(rng);
    y(i, 0) = 0.7 * x(i, 0) + 0.2 * gauss(rng);
  }
  auto h = model::default_hyperparameters(1, 3, 3, 1.0);
  auto bm = basis::fit_basis(x, 3, rng);
  vsugs::Options opts;
  opts.warm_count = 40;
  auto state = vsugs::fit_online(x, y, h, bm, opts).state;

  Vector x0(1);
  x0 << 0.3;
  auto mix = predictive_mixture(x0, state, h, bm);
  auto f = [&](double v) {
    Vector y0(1);
    y0 << v;
    return std::exp(predictive_logpdf(y0, mix));
  };
  const double total = oracles::trapezoid(f, -60.0, 60.0, 200000);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("marginal cdf: limits, monotonicity, quantile round trips") {
  auto f = small_fit();
  Vector x0(2);
  x0 << 0.1, -0.5;
  auto mix = predictive_mixture(x0, f.state, f.hyper, f.basis);

  for (int dim = 0; dim < 2; ++dim) {
    double scale = 0.0;
    double center = 0.0;
    for (const auto& c : mix.components) {
      scale = std::max(scale, c.marginal_scale(dim));
      center += c.weight * c.location(dim);
    }
    CHECK(marginal_cdf(mix, dim, center - 1e6 * scale) < 1e-12);
    CHECK(marginal_cdf(mix, dim, center + 1e6 * scale) > 1.0 - 1e-12);

    double prev = -1.0;
    for (int g = 0; g <= 200; ++g) {
      const double v = center + (g - 100) * 0.12 * scale * 10;
      const double cdf = marginal_cdf(mix, dim, v);
      CHECK(cdf >= prev);
      prev = cdf;
    }

    auto rng = numstat::make_rng(60 + dim);
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    for (int rep = 0; rep < 20; ++rep) {
      const double v = center + unif(rng) * scale;
      const double u = marginal_cdf(mix, dim, v);
      const double back = marginal_quantile(mix, dim, u);
      CHECK(back == doctest::Approx(v).epsilon(1e-8));
    }
  }

  CHECK_THROWS_AS(marginal_quantile(mix, 0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(marginal_quantile(mix, 0, 1.0), std::invalid_argument);
}

TEST_CASE("symmetric single component has median at its location") {
  auto f = small_fit();
  Vector x0(2);
  x0 << 0.0, 0.0;
  auto mix = predictive_mixture(x0, f.state, f.hyper, f.basis);
  PredictiveMixture single;
  single.dim = 2;
  single.components.push_back(mix.components[0]);
  single.components[0].weight = 1.0;
  for (int dim = 0; dim < 2; ++dim) {
    const double q = marginal_quantile(single, dim, 0.5);
    CHECK(q == doctest::Approx(single.components[0].location(dim))
                   .epsilon(1e-6));
  }
}

TEST_CASE("mixture construction is invariant under component relabeling") {
  auto f = small_fit();
  REQUIRE(f.state.seen >= f.state.trunc());
  Vector x0(2), y0(2);
  x0 << 0.25, 0.75;
  y0 << 0.5, -0.5;
  auto base = predictive_mixture(x0, f.state, f.hyper, f.basis);

  auto relabeled = f.state;
  std::swap(relabeled.components[0], relabeled.components[1]);
  auto swapped = predictive_mixture(x0, relabeled, f.hyper, f.basis);
  CHECK(predictive_logpdf(y0, base) ==
        doctest::Approx(predictive_logpdf(y0, swapped)).epsilon(1e-13));
  CHECK(swapped.components[0].weight == doctest::Approx(base.components[1].weight));
  CHECK((swapped.components[0].location - base.components[1].location).isZero(0.0));
}

TEST_CASE("predictive_mixture requires data") {
  auto h = model::default_hyperparameters(1, 0, 2, 1.0);
  auto s = model::init_state(h);
  Vector e = Vector::Ones(1);
  CHECK_THROWS_AS(predictive_mixture_from_design(e, s, h), std::invalid_argument);
}
