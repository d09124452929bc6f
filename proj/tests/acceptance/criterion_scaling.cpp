#include <doctest.h>

#include "acceptance_common.hpp"
#include "mdpreg/vsugs.hpp"

using namespace mdpreg;
using acceptance::report;

namespace {

// one pure sequential pass at N = 50, T = 10, m = 2
double time_online_pass(long n, std::uint64_t seed) {
  auto rng = numstat::make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int d = 51;
  Matrix designs(n, d), y(n, 2);
  for (long i = 0; i < n; ++i) {
    designs(i, 0) = 1.0;
    for (int k = 1; k < d; ++k) {
      designs(i, k) = std::exp(-std::abs(gauss(rng)));
    }
    y(i, 0) = gauss(rng);
    y(i, 1) = gauss(rng);
  }
  auto h = model::default_hyperparameters(2, 50, 10, 3.0);
  vsugs::OnlineFitter fitter(h);
  acceptance::Stopwatch watch;
  for (long i = 0; i < n; ++i) {
    fitter.step(y.row(i).transpose(), designs.row(i).transpose());
  }
  return watch.seconds();
}

}  // namespace

TEST_CASE("acceptance 7: linear-scaling") {
  acceptance::Stopwatch watch;

  time_online_pass(300, 1);  // warm the allocator and caches

  const std::vector<long> sizes{1000, 2000, 4000, 8000};
  std::vector<double> times;
  for (long n : sizes) {
    // best of two passes damps scheduler noise
    const double t1 = time_online_pass(n, 100 + n);
    const double t2 = time_online_pass(n, 200 + n);
    times.push_back(std::min(t1, t2));
  }

  // least squares fit time ~ a + b n and its R^2
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int k = static_cast<int>(sizes.size());
  for (int i = 0; i < k; ++i) {
    sx += sizes[i];
    sy += times[i];
    sxx += double(sizes[i]) * sizes[i];
    sxy += sizes[i] * times[i];
  }
  const double b = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  const double a = (sy - b * sx) / k;
  double ss_res = 0, ss_tot = 0;
  const double mean_t = sy / k;
  for (int i = 0; i < k; ++i) {
    const double fit = a + b * sizes[i];
    ss_res += (times[i] - fit) * (times[i] - fit);
    ss_tot += (times[i] - mean_t) * (times[i] - mean_t);
  }
  const double r2 = 1.0 - ss_res / ss_tot;

  const double secs = watch.seconds();
  const bool pass = r2 > 0.99;
  char detail[200];
  std::snprintf(detail, sizeof(detail),
                "R^2 = %.5f for time vs n on {1k,2k,4k,8k} (times %.2f/%.2f/"
                "%.2f/%.2fs); %.0fs",
                r2, times[0], times[1], times[2], times[3], secs);
  CHECK(report(7, "linear-scaling", pass, detail));
}
