#include "mdpreg/model.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace mdpreg::model {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kLog2 = 0.6931471805599453094;
}  // namespace

Hyperparameters default_hyperparameters(int response_dim, int basis_count,
                                        int trunc, double alpha) {
  Hyperparameters h;
  h.alpha = alpha;
  h.trunc = trunc;
  h.basis_count = basis_count;
  h.tau_prior = {5.0, 0.5};
  h.omega_priors.assign(basis_count + 1, {20.0, 0.5});
  h.sigma_dof = response_dim + 1;
  Matrix s = Matrix::Identity(response_dim, response_dim);
  s.array() += 1.0 / response_dim;
  h.sigma_scale = SpdMatrix(s);
  h.component_prior_means.assign(trunc, Matrix::Zero(basis_count + 1, response_dim));
  h.component_prior_precs.assign(trunc, Matrix::Zero(basis_count + 1, basis_count + 1));
  return h;
}

std::vector<std::string> validate_config(const Hyperparameters& h,
                                         int response_dim) {
  std::vector<std::string> errs;
  const int d = h.basis_count + 1;
  if (!(h.alpha > 0.0)) errs.push_back("alpha must be positive");
  if (h.trunc < 1) errs.push_back("trunc must be >= 1");
  if (h.basis_count < 0) errs.push_back("basisCount must be >= 0");
  if (!(h.tau_prior.shape > 0.0) || !(h.tau_prior.rate > 0.0)) {
    errs.push_back("tauPrior parameters must be positive");
  }
  if (static_cast<int>(h.omega_priors.size()) != d) {
    errs.push_back("omegaPriors must have basisCount+1 entries");
  }
  for (std::size_t k = 0; k < h.omega_priors.size(); ++k) {
    if (!(h.omega_priors[k].shape > 0.0) || !(h.omega_priors[k].rate > 0.0)) {
      errs.push_back("omegaPriors[" + std::to_string(k) + "] must be positive");
    }
  }
  if (h.sigma_scale.dim() != response_dim) {
    errs.push_back("sigmaPrior scale dimension does not match response dim");
  }
  if (!(h.sigma_dof > response_dim - 1)) {
    errs.push_back("sigmaPrior dof too small");
  }
  if (static_cast<int>(h.component_prior_means.size()) != h.trunc) {
    errs.push_back("componentPriorMeans must have trunc entries");
  } else {
    for (int j = 0; j < h.trunc; ++j) {
      if (h.component_prior_means[j].rows() != d ||
          h.component_prior_means[j].cols() != response_dim) {
        errs.push_back("componentPriorMeans[" + std::to_string(j) +
                       "] has wrong shape");
      }
    }
  }
  if (static_cast<int>(h.component_prior_precs.size()) != h.trunc) {
    errs.push_back("componentPriorPrecs must have trunc entries");
  } else {
    for (int j = 0; j < h.trunc; ++j) {
      const Matrix& c = h.component_prior_precs[j];
      if (c.rows() != d || c.cols() != d) {
        errs.push_back("componentPriorPrecs[" + std::to_string(j) +
                       "] has wrong shape");
        continue;
      }
      if (c.isZero(0.0)) continue;
      try {
        SpdMatrix check(c);
      } catch (const std::exception&) {
        errs.push_back("componentPriorPrecs[" + std::to_string(j) +
                       "] is neither zero nor SPD");
      }
    }
  }
  return errs;
}

Vector VariationalState::exp_omega_inv() const {
  Vector v(omegas.size());
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    v(k) = omegas[k].shape / omegas[k].rate;
  }
  return v;
}

Matrix VariationalState::exp_sigma_inv_times(const Matrix& b) const {
  return sigma_dof * sigma_scale.solve(b);
}

int VariationalState::occupied(double threshold) const {
  int n = 0;
  for (const auto& c : components) {
    if (c.mass > threshold) ++n;
  }
  return n;
}

double VariationalState::total_mass() const {
  double t = 0.0;
  for (const auto& c : components) t += c.mass;
  return t;
}

VariationalState init_state(const Hyperparameters& h) {
  const int m = h.sigma_scale.dim();
  auto errs = validate_config(h, m);
  if (!errs.empty()) {
    throw std::invalid_argument("init_state: invalid config: " + errs.front());
  }
  VariationalState s;
  s.response_dim = m;
  s.sigma_dof = h.sigma_dof;
  s.sigma_scale = h.sigma_scale;
  s.tau = h.tau_prior;
  s.omegas = h.omega_priors;
  s.seen = 0;

  Vector omega_inv(h.design_dim());
  for (int k = 0; k < h.design_dim(); ++k) {
    omega_inv(k) = h.omega_priors[k].shape / h.omega_priors[k].rate;
  }
  s.components.resize(h.trunc);
  for (int j = 0; j < h.trunc; ++j) {
    Matrix v0 = h.component_prior_precs[j];
    v0.diagonal() += omega_inv;
    s.components[j].prec = SpdMatrix(v0);
    s.components[j].beta_hat = h.component_prior_means[j];
    s.components[j].mass = 0.0;
  }
  return s;
}

double expected_loglik(const Vector& y, const Vector& e,
                       const ComponentState& comp, double sigma_dof,
                       const SpdMatrix& sigma_scale,
                       const numstat::InvGammaParams& tau) {
  const int m = static_cast<int>(y.size());
  Vector resid = y - comp.beta_hat.transpose() * e;
  const double qform =
      sigma_dof * resid.dot(sigma_scale.solve(resid)) + m * comp.prec.inv_quad(e);
  return -0.5 * m * kLog2Pi -
         0.5 * m * (std::log(tau.rate) - numstat::digamma(tau.shape)) -
         0.5 * (-numstat::mv_digamma(m, 0.5 * sigma_dof) - m * kLog2 +
                sigma_scale.logdet()) -
         0.5 * (tau.shape / tau.rate) * qform;
}

// ---------------------------------------------------------------------------
// persistence

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  j["data"] = data;
  return j;
}

Matrix matrix_from_json(const json& j) {
  if (!j.contains("rows") || !j.contains("cols") || !j.contains("data")) {
    throw StateCorruptError("state file: malformed matrix entry");
  }
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 ||
      static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw StateDimensionError("state file: matrix payload does not match declared shape");
  }
  Matrix m(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data.at(k++).get<double>();
  }
  return m;
}

json ig_to_json(const numstat::InvGammaParams& p) {
  return json{{"shape", p.shape}, {"rate", p.rate}};
}

numstat::InvGammaParams ig_from_json(const json& j) {
  return {j.at("shape").get<double>(), j.at("rate").get<double>()};
}

Matrix square_matrix_from_json(const json& j, Eigen::Index dim,
                               const char* what) {
  Matrix m = matrix_from_json(j);
  if (m.rows() != dim || m.cols() != dim) {
    throw StateDimensionError(std::string("state file: ") + what +
                              " has inconsistent dimensions");
  }
  return m;
}

}  // namespace

void save_state(const VariationalState& s, const Hyperparameters& h,
                const basis::BasisMap& bm, const std::string& path) {
  json j;
  j["schema_version"] = kStateSchemaVersion;

  json jh;
  jh["alpha"] = h.alpha;
  jh["trunc"] = h.trunc;
  jh["basis_count"] = h.basis_count;
  jh["tau_prior"] = ig_to_json(h.tau_prior);
  json omegas = json::array();
  for (const auto& o : h.omega_priors) omegas.push_back(ig_to_json(o));
  jh["omega_priors"] = omegas;
  jh["sigma_dof"] = h.sigma_dof;
  jh["sigma_scale_chol"] = matrix_to_json(h.sigma_scale.chol());
  json means = json::array();
  for (const auto& m : h.component_prior_means) means.push_back(matrix_to_json(m));
  jh["component_prior_means"] = means;
  json precs = json::array();
  for (const auto& c : h.component_prior_precs) precs.push_back(matrix_to_json(c));
  jh["component_prior_precs"] = precs;
  j["hyper"] = jh;

  json js;
  js["response_dim"] = s.response_dim;
  js["seen"] = s.seen;
  js["sigma_dof"] = s.sigma_dof;
  js["sigma_scale_chol"] = matrix_to_json(s.sigma_scale.chol());
  js["tau"] = ig_to_json(s.tau);
  json so = json::array();
  for (const auto& o : s.omegas) so.push_back(ig_to_json(o));
  js["omegas"] = so;
  json comps = json::array();
  for (const auto& c : s.components) {
    comps.push_back(json{{"beta_hat", matrix_to_json(c.beta_hat)},
                         {"prec_chol", matrix_to_json(c.prec.chol())},
                         {"mass", c.mass}});
  }
  js["components"] = comps;
  j["state"] = js;

  json jb;
  jb["centers"] = matrix_to_json(bm.centers);
  jb["kappa_sq"] = bm.kappa_sq;
  jb["standardizer_mean"] = matrix_to_json(bm.standardizer.mean);
  jb["standardizer_sd"] = matrix_to_json(bm.standardizer.sd);
  jb["kernel"] = bm.kernel == basis::KernelForm::exp_distance ? "exp-distance"
                                                              : "exp-sq-distance";
  j["basis"] = jb;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_state: cannot open " + path);
  out << j.dump(1) << '\n';
  if (!out) throw std::runtime_error("save_state: write failed for " + path);
}

SavedModel load_state(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_state: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw StateCorruptError(std::string("state file: parse failure: ") + e.what());
  }
  try {
    if (!j.contains("schema_version")) {
      throw StateCorruptError("state file: missing schema_version");
    }
    const int version = j.at("schema_version").get<int>();
    if (version != kStateSchemaVersion) {
      throw StateVersionError("state file: schema version " +
                              std::to_string(version) + " but current is " +
                              std::to_string(kStateSchemaVersion));
    }

    const json& jh = j.at("hyper");
    Hyperparameters h;
    h.alpha = jh.at("alpha").get<double>();
    h.trunc = jh.at("trunc").get<int>();
    h.basis_count = jh.at("basis_count").get<int>();
    h.tau_prior = ig_from_json(jh.at("tau_prior"));
    for (const auto& o : jh.at("omega_priors")) {
      h.omega_priors.push_back(ig_from_json(o));
    }
    h.sigma_dof = jh.at("sigma_dof").get<double>();
    h.sigma_scale = SpdMatrix::from_cholesky(matrix_from_json(jh.at("sigma_scale_chol")));
    const int m = h.sigma_scale.dim();
    const int d = h.design_dim();
    if (static_cast<int>(h.omega_priors.size()) != d) {
      throw StateDimensionError("state file: omega_priors size inconsistent");
    }
    for (const auto& mj : jh.at("component_prior_means")) {
      Matrix mm = matrix_from_json(mj);
      if (mm.rows() != d || mm.cols() != m) {
        throw StateDimensionError("state file: component prior mean shape inconsistent");
      }
      h.component_prior_means.push_back(std::move(mm));
    }
    for (const auto& cj : jh.at("component_prior_precs")) {
      h.component_prior_precs.push_back(square_matrix_from_json(cj, d, "component prior prec"));
    }
    if (static_cast<int>(h.component_prior_means.size()) != h.trunc ||
        static_cast<int>(h.component_prior_precs.size()) != h.trunc) {
      throw StateDimensionError("state file: component prior count inconsistent");
    }

    const json& js = j.at("state");
    VariationalState s;
    s.response_dim = js.at("response_dim").get<int>();
    if (s.response_dim != m) {
      throw StateDimensionError("state file: response dim inconsistent with sigma prior");
    }
    s.seen = js.at("seen").get<long>();
    s.sigma_dof = js.at("sigma_dof").get<double>();
    s.sigma_scale = SpdMatrix::from_cholesky(
        square_matrix_from_json(js.at("sigma_scale_chol"), m, "sigma scale"));
    s.tau = ig_from_json(js.at("tau"));
    for (const auto& o : js.at("omegas")) s.omegas.push_back(ig_from_json(o));
    if (static_cast<int>(s.omegas.size()) != d) {
      throw StateDimensionError("state file: omega factor count inconsistent");
    }
    for (const auto& cj : js.at("components")) {
      ComponentState c;
      c.beta_hat = matrix_from_json(cj.at("beta_hat"));
      if (c.beta_hat.rows() != d || c.beta_hat.cols() != m) {
        throw StateDimensionError("state file: beta_hat shape inconsistent");
      }
      c.prec = SpdMatrix::from_cholesky(
          square_matrix_from_json(cj.at("prec_chol"), d, "component precision"));
      c.mass = cj.at("mass").get<double>();
      s.components.push_back(std::move(c));
    }
    if (static_cast<int>(s.components.size()) != h.trunc) {
      throw StateDimensionError("state file: component count inconsistent");
    }

    const json& jb = j.at("basis");
    basis::BasisMap bm;
    bm.centers = matrix_from_json(jb.at("centers"));
    bm.kappa_sq = jb.at("kappa_sq").get<double>();
    bm.standardizer.mean = matrix_from_json(jb.at("standardizer_mean"));
    bm.standardizer.sd = matrix_from_json(jb.at("standardizer_sd"));
    const std::string kernel = jb.at("kernel").get<std::string>();
    if (kernel == "exp-distance") {
      bm.kernel = basis::KernelForm::exp_distance;
    } else if (kernel == "exp-sq-distance") {
      bm.kernel = basis::KernelForm::exp_sq_distance;
    } else {
      throw StateCorruptError("state file: unknown kernel form " + kernel);
    }
    if (bm.centers.rows() != h.basis_count ||
        bm.standardizer.mean.size() != bm.standardizer.sd.size() ||
        (bm.centers.rows() > 0 && bm.centers.cols() != bm.standardizer.mean.size())) {
      throw StateDimensionError("state file: basis dimensions inconsistent");
    }

    return SavedModel{std::move(s), std::move(h), std::move(bm)};
  } catch (const json::exception& e) {
    throw StateCorruptError(std::string("state file: malformed content: ") + e.what());
  }
}

}  // namespace mdpreg::model
