#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mdpreg/dataset.hpp"
#include "support/oracles.hpp"

using namespace mdpreg;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  auto dir = fs::temp_directory_path() / "mdpreg_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

void write_train_csv(const fs::path& p, long n, std::uint64_t seed) {
  auto rng = numstat::make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::ofstream out(p);
  out << "x1,x2,y1,y2\n";
  for (long i = 0; i < n; ++i) {
    const double x1 = gauss(rng);
    const double x2 = gauss(rng);
    const double y1 = 1.0 + 0.8 * x1 - 0.3 * x2 + 0.1 * gauss(rng);
    const double y2 = 2.0 - 0.5 * x1 + 0.1 * gauss(rng);
    out << x1 << ',' << x2 << ',' << y1 << ',' << y2 << '\n';
  }
}

int run(std::initializer_list<std::string> args) {
  return cli::run_cli(std::vector<std::string>(args));
}

}  // namespace

TEST_CASE("cli end to end: fit-online, predict, adjust, evaluate") {
  auto dir = work_dir();
  auto train = dir / "train.csv";
  auto test = dir / "test.csv";
  write_train_csv(train, 120, 7);
  write_train_csv(test, 15, 8);
  auto state = dir / "m.state";
  auto pred = dir / "p.csv";
  auto adj = dir / "a.csv";

  CHECK(run({"fit-online", "--train", train.string(), "--responses", "y1,y2",
             "--basis", "5", "--trunc", "3", "--alpha", "2", "--warm", "30",
             "--seed", "1", "--out", state.string()}) == 0);
  CHECK(fs::exists(state));

  CHECK(run({"predict", "--model", state.string(), "--test", test.string(),
             "--responses", "y1,y2", "--out", pred.string(), "--quantiles",
             "0.1,0.9"}) == 0);
  auto predictions = cli::ingest_csv(pred.string(), "");
  CHECK(predictions.covariates.rows() == 15);
  CHECK(predictions.covariates.cols() == 2 + 2 * 2);
  CHECK(predictions.covariates.allFinite());
  // quantile columns bracket the mean columns
  for (int i = 0; i < 15; ++i) {
    CHECK(predictions.covariates(i, 2) < predictions.covariates(i, 4));
  }

  CHECK(run({"adjust", "--model", state.string(), "--train", train.string(),
             "--test", test.string(), "--responses", "y1,y2", "--k", "20",
             "--out", adj.string()}) == 0);
  auto adjusted = cli::ingest_csv(adj.string(), "");
  CHECK(adjusted.covariates.rows() == 15);
  CHECK(adjusted.covariates.allFinite());

  CHECK(run({"evaluate", "--pred", adj.string(), "--truth", test.string(),
             "--responses", "y1,y2"}) == 0);
}

TEST_CASE("cli runs are byte-identical under a fixed seed") {
  auto dir = work_dir();
  auto train = dir / "train_det.csv";
  write_train_csv(train, 90, 3);
  auto s1 = dir / "det1.state";
  auto s2 = dir / "det2.state";
  auto p1 = dir / "det1.csv";
  auto p2 = dir / "det2.csv";

  for (auto [state, pred] : {std::pair{s1, p1}, std::pair{s2, p2}}) {
    CHECK(run({"fit-online", "--train", train.string(), "--responses", "y1,y2",
               "--basis", "4", "--trunc", "2", "--alpha", "1.5", "--warm", "20",
               "--seed", "42", "--out", state.string()}) == 0);
    CHECK(run({"predict", "--model", state.string(), "--test", train.string(),
               "--responses", "y1,y2", "--out", pred.string()}) == 0);
  }
  CHECK(slurp(s1) == slurp(s2));
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("cli fit-batch writes fitted values and a loadable state") {
  auto dir = work_dir();
  auto train = dir / "train_batch.csv";
  write_train_csv(train, 60, 11);
  auto state = dir / "batch.state";
  auto fitted = dir / "fitted.csv";

  CHECK(run({"fit-batch", "--train", train.string(), "--responses", "y1,y2",
             "--basis", "4", "--trunc", "3", "--alpha", "1", "--seed", "2",
             "--max-iter", "40", "--out", state.string(), "--fitted-out",
             fitted.string()}) == 0);
  auto loaded = model::load_state(state.string());
  CHECK(loaded.state.seen == 60);
  auto fit_values = cli::ingest_csv(fitted.string(), "");
  CHECK(fit_values.covariates.rows() == 60);
  CHECK(fit_values.covariates.allFinite());
}

TEST_CASE("cli fit-online writes the per-step bound series") {
  auto dir = work_dir();
  auto train = dir / "train_elbo.csv";
  write_train_csv(train, 50, 13);
  auto state = dir / "elbo.state";
  auto elbo_csv = dir / "bound.csv";
  CHECK(run({"fit-online", "--train", train.string(), "--responses", "y1,y2",
             "--basis", "3", "--trunc", "2", "--warm", "10", "--seed", "6",
             "--out", state.string(), "--elbo-csv", elbo_csv.string()}) == 0);
  auto series = cli::ingest_csv(elbo_csv.string(), "");
  CHECK(series.covariates.rows() == 40);  // one row per assimilated point
  CHECK(series.covariates.allFinite());
  // total equals the sum of the term columns
  for (int i = 0; i < 40; ++i) {
    double sum = 0.0;
    for (int c = 2; c < series.covariates.cols(); ++c) {
      sum += series.covariates(i, c);
    }
    CHECK(series.covariates(i, 1) == doctest::Approx(sum).epsilon(1e-9));
  }
}

TEST_CASE("cli config file overrides hyperparameters") {
  auto dir = work_dir();
  auto train = dir / "train_cfg.csv";
  write_train_csv(train, 40, 5);
  auto cfg = dir / "hyper.cfg";
  {
    std::ofstream out(cfg);
    out << "# commentary\n"
        << "a_tau = 7\n"
        << "b_tau = 0.25\n"
        << "nu = 4\n";
  }
  auto state = dir / "cfg.state";
  CHECK(run({"fit-online", "--train", train.string(), "--responses", "y1,y2",
             "--basis", "3", "--trunc", "2", "--warm", "10", "--config",
             cfg.string(), "--out", state.string()}) == 0);
  auto loaded = model::load_state(state.string());
  CHECK(loaded.hyper.tau_prior.shape == 7.0);
  CHECK(loaded.hyper.tau_prior.rate == 0.25);
  CHECK(loaded.hyper.sigma_dof == 4.0);
}

TEST_CASE("cli pipeline on the shipped benchmark data stays finite") {
  auto dir = work_dir();
  auto state = dir / "energy.state";
  auto pred = dir / "energy_pred.csv";
  const std::string train = std::string(MDPREG_SOURCE_DIR) + "/data/energy.csv";

  CHECK(run({"fit-online", "--train", train, "--responses", "y1,y2", "--basis",
             "20", "--trunc", "4", "--alpha", "3", "--warm", "60", "--seed",
             "9", "--out", state.string()}) == 0);
  CHECK(run({"predict", "--model", state.string(), "--test", train,
             "--responses", "y1,y2", "--out", pred.string()}) == 0);
  auto predictions = cli::ingest_csv(pred.string(), "");
  CHECK(predictions.covariates.rows() == 768);
  CHECK(predictions.covariates.allFinite());
}

TEST_CASE("cli scan subcommands run at toy scale") {
  auto dir = work_dir();
  auto zeta_csv = dir / "demo_zeta.csv";
  CHECK(run({"demo-bioassay", "--sims", "1500", "--grid", "2",
             "--baseline-sims", "200", "--k", "150", "--basis", "15", "--warm",
             "80", "--seed", "3", "--out", zeta_csv.string()}) == 0);
  auto zeta = cli::ingest_csv(zeta_csv.string(), "");
  CHECK(zeta.covariates.rows() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(zeta.covariates(i, 2) >= 0.0);
    CHECK(zeta.covariates(i, 2) <= 1.0);
  }

  auto cfg = dir / "scan.cfg";
  {
    std::ofstream out(cfg);
    out << "simulator = bioassay\n"
        << "sims = 1200\nbaseline_sims = 150\nk = 120\nbasis = 12\nwarm = 60\n"
        << "grid_count0 = 2\ngrid_count1 = 2\nseed = 4\n";
  }
  auto scan_csv = dir / "scan_zeta.csv";
  CHECK(run({"prior-scan", "--scan-config", cfg.string(), "--out",
             scan_csv.string()}) == 0);
  auto scanned = cli::ingest_csv(scan_csv.string(), "");
  CHECK(scanned.covariates.rows() == 4);
}

TEST_CASE("cli error paths and exit codes") {
  auto dir = work_dir();
  // missing input file -> 1, message carries the path
  CHECK(run({"predict", "--model", (dir / "absent.state").string(), "--test",
             (dir / "absent.csv").string(), "--out",
             (dir / "x.csv").string()}) == 1);
  // unknown subcommand / flag -> usage, 2
  CHECK(run({"frobnicate"}) == 2);
  CHECK(run({"evaluate", "--pred", "a.csv", "--truth", "b.csv",
             "--no-such-flag"}) == 2);
  CHECK(run({}) == 2);
}
