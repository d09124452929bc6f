#pragma once

// Helpers shared by the acceptance criteria. Each criterion prints exactly
// one PASS/FAIL line via report().

#include <chrono>
#include <cstdio>
#include <string>

#include "mdpreg/vsugs.hpp"
#include "support/oracles.hpp"

namespace acceptance {

using mdpreg::Matrix;
using mdpreg::Vector;

inline bool report(int number, const std::string& name, bool pass,
                   const std::string& detail) {
  std::printf("ACCEPTANCE %d %-28s %s  (%s)\n", number, name.c_str(),
              pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  return pass;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration_cast<std::chrono::duration<double>>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

struct TwoRegimeData {
  Matrix x;
  Matrix y;
};

// the m=2 two-regime generator used by the density oracles
inline TwoRegimeData two_regime_data(long n, std::uint64_t seed) {
  TwoRegimeData out;
  auto rng = mdpreg::numstat::make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  out.x.resize(n, 2);
  out.y.resize(n, 2);
  for (long i = 0; i < n; ++i) {
    out.x(i, 0) = unif(rng);
    out.x(i, 1) = unif(rng);
    const double flip = unif(rng) < 0.0 ? 1.0 : -1.0;
    out.y(i, 0) = flip * (1.0 + 0.8 * out.x(i, 0)) + 0.15 * gauss(rng);
    out.y(i, 1) = -flip * 0.5 * out.x(i, 1) + 0.15 * gauss(rng);
  }
  return out;
}

struct FittedSmall {
  mdpreg::model::Hyperparameters hyper;
  mdpreg::basis::BasisMap basis;
  mdpreg::model::VariationalState state;
  TwoRegimeData data;
};

inline FittedSmall fitted_small_state(long n = 200, std::uint64_t seed = 9) {
  FittedSmall out;
  out.data = two_regime_data(n, seed);
  auto rng = mdpreg::numstat::make_rng(seed + 1);
  out.hyper = mdpreg::model::default_hyperparameters(2, 2, 2, 1.5);
  out.basis = mdpreg::basis::fit_basis(out.data.x, 2, rng);
  mdpreg::vsugs::Options opts;
  opts.warm_count = 50;
  opts.seed = seed;
  out.state =
      mdpreg::vsugs::fit_online(out.data.x, out.data.y, out.hyper, out.basis, opts)
          .state;
  return out;
}

}  // namespace acceptance
