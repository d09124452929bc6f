#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "mdpreg/dataset.hpp"
#include "mdpreg/elbo.hpp"
#include "mdpreg/predictive.hpp"
#include "mdpreg/priorcheck.hpp"
#include "mdpreg/regadjust.hpp"
#include "mdpreg/vsugs.hpp"

namespace mdpreg::cli {

namespace {

class PhaseTimer {
 public:
  explicit PhaseTimer(std::string name)
      : name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
  ~PhaseTimer() {
    const auto stop = std::chrono::steady_clock::now();
    const double secs =
        std::chrono::duration_cast<std::chrono::duration<double>>(stop - start_)
            .count();
    std::printf("timing: %-12s %.3fs\n", name_.c_str(), secs);
  }

 private:
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::map<std::string, std::string> out;
  if (path.empty()) return out;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config: missing '=' at line " +
                               std::to_string(line_no));
    }
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

double config_num(const std::map<std::string, std::string>& cfg,
                  const std::string& key, double fallback) {
  auto it = cfg.find(key);
  return it == cfg.end() ? fallback : std::stod(it->second);
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Matrix& values) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output " + path);
  for (std::size_t c = 0; c < header.size(); ++c) {
    out << (c ? "," : "") << header[c];
  }
  out << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      out << (c ? "," : "") << format_value(values(i, c));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

struct FitFlags {
  std::string train;
  std::string responses;
  std::string out;
  std::string config_path;
  std::string kernel = "paper";
  std::string fitted_out;
  int basis = 200;
  int trunc = 10;
  double alpha = 3.0;
  std::uint64_t seed = 0;
  int max_iter = 100;
  double tol = 1e-8;
  // online only
  long warm = 0;
  std::string tau_mode = "accumulate";
  std::string elbo_csv;
};

void add_fit_flags(CLI::App* cmd, FitFlags& f, bool online) {
  cmd->add_option("--train", f.train, "training CSV")->required();
  cmd->add_option("--responses", f.responses, "response columns (names or 1-based indices)")
      ->required();
  cmd->add_option("--out", f.out, "state file to write")->required();
  cmd->add_option("--basis", f.basis, "number of kernel basis functions N");
  cmd->add_option("--trunc", f.trunc, "truncation level T");
  cmd->add_option("--alpha", f.alpha, "DP concentration");
  cmd->add_option("--seed", f.seed, "rng seed");
  cmd->add_option("--kernel", f.kernel, "kernel form: paper | gaussian-sq")
      ->check(CLI::IsMember({"paper", "gaussian-sq"}));
  cmd->add_option("--config", f.config_path, "key=value hyperparameter overrides");
  cmd->add_option("--max-iter", f.max_iter, "batch sweep cap");
  cmd->add_option("--tol", f.tol, "batch stopping tolerance");
  cmd->add_option("--fitted-out", f.fitted_out, "write in-sample fitted values CSV");
  if (online) {
    cmd->add_option("--warm", f.warm, "batch warm-start size");
    cmd->add_option("--tau-mode", f.tau_mode, "accumulate | recompute")
        ->check(CLI::IsMember({"accumulate", "recompute"}));
    cmd->add_option("--elbo-csv", f.elbo_csv, "per-step lower bound CSV");
  }
}

model::Hyperparameters resolve_hyper(const FitFlags& f, int m,
                                     const std::map<std::string, std::string>& cfg) {
  auto h = model::default_hyperparameters(m, f.basis, f.trunc, f.alpha);
  h.tau_prior.shape = config_num(cfg, "a_tau", h.tau_prior.shape);
  h.tau_prior.rate = config_num(cfg, "b_tau", h.tau_prior.rate);
  const double a_omega = config_num(cfg, "a_omega", 20.0);
  const double b_omega = config_num(cfg, "b_omega", 0.5);
  for (auto& o : h.omega_priors) o = {a_omega, b_omega};
  h.sigma_dof = config_num(cfg, "nu", h.sigma_dof);
  return h;
}

void print_fit_config(const FitFlags& f, const model::Hyperparameters& h, int m) {
  std::printf("config: train=%s responses=%s basis=%d trunc=%d alpha=%g seed=%llu\n",
              f.train.c_str(), f.responses.c_str(), h.basis_count, h.trunc,
              h.alpha, static_cast<unsigned long long>(f.seed));
  std::printf("config: m=%d a_tau=%g b_tau=%g a_omega=%g b_omega=%g nu=%g kernel=%s\n",
              m, h.tau_prior.shape, h.tau_prior.rate, h.omega_priors[0].shape,
              h.omega_priors[0].rate, h.sigma_dof, f.kernel.c_str());
}

basis::KernelForm kernel_form(const std::string& name) {
  return name == "gaussian-sq" ? basis::KernelForm::exp_sq_distance
                               : basis::KernelForm::exp_distance;
}

int cmd_fit_batch(const FitFlags& f) {
  Dataset data;
  {
    PhaseTimer t("ingest");
    data = ingest_csv(f.train, f.responses);
  }
  const int m = static_cast<int>(data.responses.cols());
  auto cfg = read_config_file(f.config_path);
  auto h = resolve_hyper(f, m, cfg);
  print_fit_config(f, h, m);

  auto rng = numstat::make_stream(f.seed, 1);
  basis::BasisMap bm;
  batchvb::FitResult fit;
  {
    PhaseTimer t("basis");
    bm = basis::fit_basis(data.covariates, f.basis, rng, kernel_form(f.kernel));
  }
  Matrix designs = bm.expand_raw_rows(data.covariates);
  {
    PhaseTimer t("batch");
    batchvb::Options opts;
    opts.max_iter = f.max_iter;
    opts.tol = f.tol;
    opts.seed = f.seed;
    fit = batchvb::fit_batch(data.responses, designs, h, opts);
  }
  std::printf("batch: sweeps=%zu converged=%s occupied=%d\n",
              fit.diagnostics.sweep_max_change.size(),
              fit.diagnostics.converged ? "yes" : "no", fit.state.occupied());
  model::save_state(fit.state, h, bm, f.out);
  std::printf("state written to %s\n", f.out.c_str());

  if (!f.fitted_out.empty()) {
    Matrix fitted = insample_fit(fit.state, fit.alloc, designs);
    std::vector<std::string> header;
    for (const auto& name : data.response_names) header.push_back("fit_" + name);
    write_csv(f.fitted_out, header, fitted);
  }
  return 0;
}

int cmd_fit_online(const FitFlags& f) {
  Dataset data;
  {
    PhaseTimer t("ingest");
    data = ingest_csv(f.train, f.responses);
  }
  const int m = static_cast<int>(data.responses.cols());
  const auto n = data.responses.rows();
  if (f.warm > n) throw std::runtime_error("--warm exceeds training rows");
  auto cfg = read_config_file(f.config_path);
  auto h = resolve_hyper(f, m, cfg);
  print_fit_config(f, h, m);
  std::printf("config: warm=%ld tau_mode=%s\n", f.warm, f.tau_mode.c_str());

  auto rng = numstat::make_stream(f.seed, 1);
  basis::BasisMap bm;
  {
    PhaseTimer t("basis");
    bm = basis::fit_basis(data.covariates, f.basis, rng, kernel_form(f.kernel));
  }
  Matrix designs = bm.expand_raw_rows(data.covariates);

  const auto mode = f.tau_mode == "recompute" ? vsugs::TauRateMode::recompute
                                              : vsugs::TauRateMode::accumulate;
  vsugs::OnlineFitter fitter(h, mode);
  Matrix alloc_history = Matrix::Zero(n, h.trunc);
  if (f.warm > 0) {
    PhaseTimer t("warm-batch");
    batchvb::Options opts;
    opts.max_iter = f.max_iter;
    opts.tol = f.tol;
    opts.seed = f.seed;
    auto warm = batchvb::fit_batch(data.responses.topRows(f.warm),
                                   designs.topRows(f.warm), h, opts);
    alloc_history.topRows(f.warm) = warm.alloc;
    fitter.seed_from_batch(warm, data.responses.topRows(f.warm),
                           designs.topRows(f.warm));
  }

  std::ofstream elbo_out;
  if (!f.elbo_csv.empty()) {
    elbo_out.open(f.elbo_csv);
    if (!elbo_out) throw std::runtime_error("cannot open " + f.elbo_csv);
    elbo_out << "step,total,tau,sigma,omega_sum,beta_sum,likelihood,alloc_prior,entropy\n";
  }
  {
    PhaseTimer t("online");
    for (Eigen::Index i = f.warm; i < n; ++i) {
      const Vector y = data.responses.row(i).transpose();
      const Vector e = designs.row(i).transpose();
      if (elbo_out.is_open()) {
        model::VariationalState prev = fitter.state();
        auto alloc = fitter.step(y, e);
        Vector probs = alloc.padded(h.trunc);
        Vector logr = Vector::Constant(h.trunc, 0.0);
        logr.head(alloc.log_prior_weights.size()) = alloc.log_prior_weights;
        auto bound = elbo::step_lower_bound(y, e, prev, fitter.state(), probs, logr);
        alloc_history.row(i) = probs.transpose();
        elbo_out << i + 1 << ',' << format_value(bound.total) << ','
                 << format_value(bound.tau_term) << ','
                 << format_value(bound.sigma_term) << ','
                 << format_value(bound.omega_terms.sum()) << ','
                 << format_value(bound.beta_terms.sum()) << ','
                 << format_value(bound.likelihood_term) << ','
                 << format_value(bound.alloc_prior_term) << ','
                 << format_value(bound.entropy_term) << '\n';
      } else {
        alloc_history.row(i) = fitter.step(y, e).padded(h.trunc).transpose();
      }
    }
  }
  std::printf("online: seen=%ld occupied=%d\n", fitter.state().seen,
              fitter.state().occupied());
  model::save_state(fitter.state(), h, bm, f.out);
  std::printf("state written to %s\n", f.out.c_str());

  if (!f.fitted_out.empty()) {
    Matrix fitted = insample_fit(fitter.state(), alloc_history, designs);
    std::vector<std::string> header;
    for (const auto& name : data.response_names) header.push_back("fit_" + name);
    write_csv(f.fitted_out, header, fitted);
  }
  return 0;
}

struct PredictFlags {
  std::string model;
  std::string test;
  std::string responses;  // columns to drop from the test file, if any
  std::string out;
  std::string quantiles;
};

int cmd_predict(const PredictFlags& f) {
  model::SavedModel saved;
  Dataset data;
  {
    PhaseTimer t("ingest");
    saved = model::load_state(f.model);
    data = ingest_csv(f.test, f.responses);
  }
  std::vector<double> levels;
  if (!f.quantiles.empty()) {
    std::stringstream ss(f.quantiles);
    std::string tok;
    while (std::getline(ss, tok, ',')) levels.push_back(std::stod(tok));
  }
  std::printf("config: model=%s test=%s rows=%ld quantiles=%s\n", f.model.c_str(),
              f.test.c_str(), static_cast<long>(data.covariates.rows()),
              f.quantiles.empty() ? "-" : f.quantiles.c_str());

  const int m = saved.state.response_dim;
  Matrix out_values(data.covariates.rows(),
                    m + static_cast<Eigen::Index>(levels.size()) * m);
  {
    PhaseTimer t("predict");
    for (Eigen::Index i = 0; i < data.covariates.rows(); ++i) {
      auto mix = predictive::predictive_mixture(data.covariates.row(i).transpose(),
                                                saved.state, saved.hyper, saved.basis);
      out_values.row(i).head(m) = predictive::predictive_mean(mix).transpose();
      Eigen::Index c = m;
      for (double u : levels) {
        for (int l = 0; l < m; ++l) {
          out_values(i, c++) = predictive::marginal_quantile(mix, l, u);
        }
      }
    }
  }
  std::vector<std::string> header;
  for (int l = 0; l < m; ++l) header.push_back("pred_y" + std::to_string(l + 1));
  for (double u : levels) {
    for (int l = 0; l < m; ++l) {
      header.push_back("q" + std::to_string(u).substr(0, 6) + "_y" +
                       std::to_string(l + 1));
    }
  }
  write_csv(f.out, header, out_values);
  std::printf("predictions written to %s\n", f.out.c_str());
  return 0;
}

struct AdjustFlags {
  std::string model;
  std::string train;
  std::string test;
  std::string responses;
  std::string out;
  int k = 50;
  bool median = false;
};

int cmd_adjust(const AdjustFlags& f) {
  model::SavedModel saved;
  Dataset train;
  Dataset test;
  {
    PhaseTimer t("ingest");
    saved = model::load_state(f.model);
    train = ingest_csv(f.train, f.responses);
    test = ingest_csv(f.test, f.responses);
  }
  std::printf("config: model=%s k=%d median=%d test_rows=%ld\n", f.model.c_str(),
              f.k, f.median ? 1 : 0, static_cast<long>(test.covariates.rows()));

  Matrix out_values(test.covariates.rows(), saved.state.response_dim);
  {
    PhaseTimer t("adjust");
    Matrix x_std = saved.basis.standardizer.apply(train.covariates);
    regadjust::MixtureCache cache(train.covariates, saved.state, saved.hyper,
                                  saved.basis);
    for (Eigen::Index i = 0; i < test.covariates.rows(); ++i) {
      const Vector x = test.covariates.row(i).transpose();
      auto nb = regadjust::knn_search(saved.basis.standardizer.apply(x), x_std, f.k);
      auto target =
          predictive::predictive_mixture(x, saved.state, saved.hyper, saved.basis);
      auto particles =
          regadjust::adjust_particles(target, nb, train.responses, cache);
      if (f.median) {
        for (Eigen::Index l = 0; l < out_values.cols(); ++l) {
          std::vector<double> col(particles.particles.col(l).data(),
                                  particles.particles.col(l).data() +
                                      particles.particles.rows());
          std::sort(col.begin(), col.end());
          const auto sz = col.size();
          out_values(i, l) = sz % 2 ? col[sz / 2]
                                    : 0.5 * (col[sz / 2 - 1] + col[sz / 2]);
        }
      } else {
        out_values.row(i) = particles.particles.colwise().mean();
      }
    }
  }
  std::vector<std::string> header;
  for (int l = 0; l < saved.state.response_dim; ++l) {
    header.push_back("adj_y" + std::to_string(l + 1));
  }
  write_csv(f.out, header, out_values);
  std::printf("adjusted predictions written to %s\n", f.out.c_str());
  return 0;
}

struct EvaluateFlags {
  std::string pred;
  std::string truth;
  std::string responses;
  std::string out;
};

int cmd_evaluate(const EvaluateFlags& f) {
  Dataset pred = ingest_csv(f.pred, "");
  Matrix truth;
  std::vector<std::string> names;
  if (f.responses.empty()) {
    Dataset t = ingest_csv(f.truth, "");
    truth = t.covariates;
    names = t.covariate_names;
  } else {
    Dataset t = ingest_csv(f.truth, f.responses);
    truth = t.responses;
    names = t.response_names;
  }
  Metrics mt = metrics(truth, pred.covariates);
  std::printf("%-10s %12s %12s %8s\n", "dimension", "rmse", "mape", "skipped");
  for (Eigen::Index l = 0; l < mt.rmse.size(); ++l) {
    std::printf("%-10s %12.6f %12.6f %8ld\n", names[l].c_str(), mt.rmse(l),
                mt.mape(l), mt.mape_skipped[l]);
  }
  std::printf("%-10s %12.6f %12.6f\n", "mean", mt.mean_rmse, mt.mean_mape);
  if (!f.out.empty()) {
    Matrix table(mt.rmse.size(), 2);
    table.col(0) = mt.rmse;
    table.col(1) = mt.mape;
    write_csv(f.out, {"rmse", "mape"}, table);
  }
  return 0;
}

struct ScanFlags {
  std::string config_path;
  std::string out;
  std::string pvalues_out;
};

struct BioassayFlags {
  std::string out = "bioassay_zeta.csv";
  std::string pvalues_out;
  long sims = 50000;
  long baseline_sims = 10000;
  int grid = 20;
  int basis = 50;
  long warm = 200;
  int trunc = 4;
  double alpha = 100.0;
  double gamma = 0.05;
  int k = 1000;
  std::uint64_t seed = 0;
  bool conventional_sign = false;
};

// Shared driver: simulate or load the (lambda, statistic) corpus, fit the
// online model of statistic on lambda, then run the grid scan.
int run_scan(const BioassayFlags& f, const Matrix& grid,
             const Vector& baseline_lambda,
             const std::optional<std::pair<Matrix, Matrix>>& external_corpus,
             const std::optional<Matrix>& external_baseline) {
  const bool printed_sign = !f.conventional_sign;
  priorcheck::Simulator simulator = [printed_sign](const Vector& lambda,
                                                   numstat::Rng& rng) {
    return priorcheck::bioassay_simulate(lambda(0), lambda(1), rng, printed_sign);
  };

  Matrix lambdas;
  Matrix stats;
  if (external_corpus) {
    lambdas = external_corpus->first;
    stats = external_corpus->second;
  } else {
    PhaseTimer t("simulate");
    auto rng = numstat::make_stream(f.seed, 11);
    std::uniform_real_distribution<double> u0(0.1, 10.0);
    std::uniform_real_distribution<double> u1(0.1, 20.0);
    lambdas.resize(f.sims, 2);
    stats.resize(f.sims, 2);
    for (long i = 0; i < f.sims; ++i) {
      lambdas(i, 0) = u0(rng);
      lambdas(i, 1) = u1(rng);
      stats.row(i) =
          simulator(lambdas.row(i).transpose(), rng).transpose();
    }
  }

  const int m = static_cast<int>(stats.cols());
  auto h = model::default_hyperparameters(m, f.basis, f.trunc, f.alpha);
  for (auto& o : h.omega_priors) o = {5.0, 0.5};  // the demo's prior setting

  auto rng = numstat::make_stream(f.seed, 12);
  basis::BasisMap bm;
  {
    PhaseTimer t("basis");
    bm = basis::fit_basis(lambdas, f.basis, rng);
  }
  vsugs::OnlineResult fit;
  {
    PhaseTimer t("fit-online");
    vsugs::Options opts;
    opts.warm_count = f.warm;
    opts.seed = f.seed;
    fit = vsugs::fit_online(lambdas, stats, h, bm, opts);
  }

  priorcheck::ScanConfig cfg;
  cfg.grid = grid;
  cfg.baseline_lambda = baseline_lambda;
  cfg.gamma = f.gamma;
  cfg.k_neighbors = f.k;
  cfg.baseline_count = f.baseline_sims;
  cfg.seed = f.seed;

  priorcheck::ScanResult result;
  {
    PhaseTimer t("scan");
    if (external_baseline) {
      // baseline draws supplied as data: bypass the simulator for them
      priorcheck::Simulator from_rows =
          [rows = *external_baseline, i = long(0)](const Vector&,
                                                   numstat::Rng&) mutable {
            return Vector(rows.row(i++ % rows.rows()).transpose());
          };
      result = priorcheck::prior_scan(from_rows, cfg, fit.state, h, bm, lambdas,
                                      stats);
    } else {
      result =
          priorcheck::prior_scan(simulator, cfg, fit.state, h, bm, lambdas, stats);
    }
  }

  Matrix table(grid.rows(), grid.cols() + 1);
  table.leftCols(grid.cols()) = grid;
  table.col(grid.cols()) = result.zeta;
  std::vector<std::string> header;
  for (Eigen::Index c = 0; c < grid.cols(); ++c) {
    header.push_back("lambda" + std::to_string(c));
  }
  header.push_back("zeta");
  write_csv(f.out, header, table);
  std::printf("scan written to %s (%ld grid points)\n", f.out.c_str(),
              static_cast<long>(grid.rows()));

  if (!f.pvalues_out.empty()) {
    Matrix pv(result.pvalues.rows() + 1, result.pvalues.cols());
    pv.row(0) = result.baseline_pvalues.transpose();
    pv.bottomRows(result.pvalues.rows()) = result.pvalues;
    std::vector<std::string> pheader;
    for (Eigen::Index c = 0; c < pv.cols(); ++c) {
      pheader.push_back("p" + std::to_string(c));
    }
    write_csv(f.pvalues_out, pheader, pv);
  }
  return 0;
}

Matrix make_grid(double lo0, double hi0, int n0, double lo1, double hi1, int n1) {
  Matrix grid(static_cast<Eigen::Index>(n0) * n1, 2);
  Eigen::Index r = 0;
  for (int i = 0; i < n0; ++i) {
    for (int j = 0; j < n1; ++j) {
      grid(r, 0) = n0 == 1 ? lo0 : lo0 + (hi0 - lo0) * i / double(n0 - 1);
      grid(r, 1) = n1 == 1 ? lo1 : lo1 + (hi1 - lo1) * j / double(n1 - 1);
      ++r;
    }
  }
  return grid;
}

int cmd_demo_bioassay(const BioassayFlags& f) {
  std::printf(
      "config: sims=%ld grid=%dx%d basis=%d trunc=%d alpha=%g warm=%ld k=%d "
      "gamma=%g seed=%llu\n",
      f.sims, f.grid, f.grid, f.basis, f.trunc, f.alpha, f.warm, f.k, f.gamma,
      static_cast<unsigned long long>(f.seed));
  Matrix grid = make_grid(0.1, 10.0, f.grid, 0.1, 20.0, f.grid);
  Vector base(2);
  base << 10.0, 2.5;
  return run_scan(f, grid, base, std::nullopt, std::nullopt);
}

int cmd_prior_scan(const ScanFlags& sf) {
  auto cfg = read_config_file(sf.config_path);
  BioassayFlags f;
  f.out = sf.out.empty() ? "scan_zeta.csv" : sf.out;
  f.pvalues_out = sf.pvalues_out;
  f.sims = static_cast<long>(config_num(cfg, "sims", 50000));
  f.baseline_sims = static_cast<long>(config_num(cfg, "baseline_sims", 10000));
  f.basis = static_cast<int>(config_num(cfg, "basis", 50));
  f.warm = static_cast<long>(config_num(cfg, "warm", 200));
  f.trunc = static_cast<int>(config_num(cfg, "trunc", 4));
  f.alpha = config_num(cfg, "alpha", 100.0);
  f.gamma = config_num(cfg, "gamma", 0.05);
  f.k = static_cast<int>(config_num(cfg, "k", 1000));
  f.seed = static_cast<std::uint64_t>(config_num(cfg, "seed", 0));
  f.conventional_sign = cfg.count("statistic_sign") &&
                        cfg.at("statistic_sign") == "conventional";

  Matrix grid = make_grid(config_num(cfg, "grid_min0", 0.1),
                          config_num(cfg, "grid_max0", 10.0),
                          static_cast<int>(config_num(cfg, "grid_count0", 20)),
                          config_num(cfg, "grid_min1", 0.1),
                          config_num(cfg, "grid_max1", 20.0),
                          static_cast<int>(config_num(cfg, "grid_count1", 20)));
  Vector base(2);
  base << config_num(cfg, "baseline0", 10.0), config_num(cfg, "baseline1", 2.5);

  std::optional<std::pair<Matrix, Matrix>> corpus;
  std::optional<Matrix> baseline_rows;
  if (cfg.count("corpus_csv")) {
    if (!cfg.count("responses")) {
      throw std::runtime_error("scan config: corpus_csv requires responses=");
    }
    Dataset d = ingest_csv(cfg.at("corpus_csv"), cfg.at("responses"));
    corpus = std::make_pair(d.covariates, d.responses);
    if (!cfg.count("baseline_csv")) {
      throw std::runtime_error("scan config: corpus_csv requires baseline_csv=");
    }
    Dataset b = ingest_csv(cfg.at("baseline_csv"), "");
    baseline_rows = b.covariates;
    f.baseline_sims = b.covariates.rows();
  } else if (!cfg.count("simulator") || cfg.at("simulator") != "bioassay") {
    throw std::runtime_error(
        "scan config: set simulator=bioassay or corpus_csv=...");
  }
  std::printf("config: scan gamma=%g grid=%ldx%ld baseline=(%g,%g)\n", f.gamma,
              static_cast<long>(grid.rows()), 1L, base(0), base(1));
  return run_scan(f, grid, base, corpus, baseline_rows);
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"matrix-variate DP mixture regression"};
  app.require_subcommand(1);

  FitFlags batch_flags;
  auto* fit_batch_cmd = app.add_subcommand("fit-batch", "batch variational fit");
  add_fit_flags(fit_batch_cmd, batch_flags, false);

  FitFlags online_flags;
  auto* fit_online_cmd =
      app.add_subcommand("fit-online", "sequential one-pass fit");
  add_fit_flags(fit_online_cmd, online_flags, true);

  PredictFlags predict_flags;
  auto* predict_cmd =
      app.add_subcommand("predict", "posterior predictive means/quantiles");
  predict_cmd->add_option("--model", predict_flags.model)->required();
  predict_cmd->add_option("--test", predict_flags.test)->required();
  predict_cmd->add_option("--responses", predict_flags.responses,
                          "response columns present in the test file to drop");
  predict_cmd->add_option("--out", predict_flags.out)->required();
  predict_cmd->add_option("--quantiles", predict_flags.quantiles,
                          "comma-separated levels, e.g. 0.05,0.95");

  AdjustFlags adjust_flags;
  auto* adjust_cmd =
      app.add_subcommand("adjust", "regression-adjusted predictions");
  adjust_cmd->add_option("--model", adjust_flags.model)->required();
  adjust_cmd->add_option("--train", adjust_flags.train)->required();
  adjust_cmd->add_option("--test", adjust_flags.test)->required();
  adjust_cmd->add_option("--responses", adjust_flags.responses)->required();
  adjust_cmd->add_option("--out", adjust_flags.out)->required();
  adjust_cmd->add_option("--k", adjust_flags.k, "neighbourhood size");
  adjust_cmd->add_flag("--median", adjust_flags.median,
                       "particle median instead of mean");

  EvaluateFlags eval_flags;
  auto* eval_cmd = app.add_subcommand("evaluate", "RMSE/MAPE table");
  eval_cmd->add_option("--pred", eval_flags.pred)->required();
  eval_cmd->add_option("--truth", eval_flags.truth)->required();
  eval_cmd->add_option("--responses", eval_flags.responses,
                       "response columns of the truth file");
  eval_cmd->add_option("--out", eval_flags.out);

  ScanFlags scan_flags;
  auto* scan_cmd =
      app.add_subcommand("prior-scan", "conflict p-value grid scan");
  scan_cmd->add_option("--scan-config", scan_flags.config_path)->required();
  scan_cmd->add_option("--out", scan_flags.out);
  scan_cmd->add_option("--pvalues-out", scan_flags.pvalues_out);

  BioassayFlags bio_flags;
  auto* bio_cmd =
      app.add_subcommand("demo-bioassay", "desk-scale bioassay screening demo");
  bio_cmd->add_option("--out", bio_flags.out);
  bio_cmd->add_option("--pvalues-out", bio_flags.pvalues_out);
  bio_cmd->add_option("--sims", bio_flags.sims);
  bio_cmd->add_option("--baseline-sims", bio_flags.baseline_sims);
  bio_cmd->add_option("--grid", bio_flags.grid);
  bio_cmd->add_option("--basis", bio_flags.basis);
  bio_cmd->add_option("--warm", bio_flags.warm);
  bio_cmd->add_option("--trunc", bio_flags.trunc);
  bio_cmd->add_option("--alpha", bio_flags.alpha);
  bio_cmd->add_option("--gamma", bio_flags.gamma);
  bio_cmd->add_option("--k", bio_flags.k);
  bio_cmd->add_option("--seed", bio_flags.seed);
  bio_cmd->add_flag("--conventional-sign", bio_flags.conventional_sign,
                    "use 1/(1+exp(-(c0+c1 x))) for the statistic");

  std::vector<std::string> argv_strings;
  argv_strings.push_back("mdpreg");
  argv_strings.insert(argv_strings.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_strings) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 2;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    int rc = 0;
    if (fit_batch_cmd->parsed()) rc = cmd_fit_batch(batch_flags);
    if (fit_online_cmd->parsed()) rc = cmd_fit_online(online_flags);
    if (predict_cmd->parsed()) rc = cmd_predict(predict_flags);
    if (adjust_cmd->parsed()) rc = cmd_adjust(adjust_flags);
    if (eval_cmd->parsed()) rc = cmd_evaluate(eval_flags);
    if (scan_cmd->parsed()) rc = cmd_prior_scan(scan_flags);
    if (bio_cmd->parsed()) rc = cmd_demo_bioassay(bio_flags);
    const auto stop = std::chrono::steady_clock::now();
    std::printf("timing: %-12s %.3fs\n", "total",
                std::chrono::duration_cast<std::chrono::duration<double>>(stop -
                                                                          start)
                    .count());
    return rc;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}

}  // namespace mdpreg::cli
