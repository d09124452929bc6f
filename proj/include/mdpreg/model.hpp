#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "mdpreg/basis.hpp"
#include "mdpreg/numstat.hpp"
#include "mdpreg/spd.hpp"

namespace mdpreg::model {

// Prior constants shared by the batch and online fitters.
struct Hyperparameters {
  double alpha = 1.0;  // DP concentration
  int trunc = 1;       // T
  int basis_count = 0; // N

  numstat::InvGammaParams tau_prior;
  std::vector<numstat::InvGammaParams> omega_priors;  // N+1 entries

  double sigma_dof = 0.0;  // nu
  SpdMatrix sigma_scale;   // S, m x m

  std::vector<Matrix> component_prior_means;  // T of (N+1) x m  (M_j)
  std::vector<Matrix> component_prior_precs;  // T of (N+1) x (N+1), zero or SPD (C_j)

  int design_dim() const { return basis_count + 1; }
};

// a_tau=5, b_tau=0.5, a_k=20, b_k=0.5, S = I + (1/m) 11^T, nu = m+1,
// M_j = 0, C_j = 0.
Hyperparameters default_hyperparameters(int response_dim, int basis_count,
                                        int trunc, double alpha);

// Returns every violated constraint; an empty list means the config is valid.
std::vector<std::string> validate_config(const Hyperparameters& h,
                                         int response_dim);

struct ComponentState {
  Matrix beta_hat;  // (N+1) x m
  SpdMatrix prec;   // V_j
  double mass = 0.0;
};

constexpr double kOccupancyThreshold = 1e-6;

struct VariationalState {
  std::vector<ComponentState> components;  // T entries

  double sigma_dof = 0.0;  // nu^(i)
  SpdMatrix sigma_scale;   // S^(i)

  numstat::InvGammaParams tau;                 // (a_tau^(i), b_tau^(i))
  std::vector<numstat::InvGammaParams> omegas; // N+1 entries

  long seen = 0;
  int response_dim = 0;

  int trunc() const { return static_cast<int>(components.size()); }
  int design_dim() const { return static_cast<int>(omegas.size()); }

  double exp_tau_inv() const { return tau.shape / tau.rate; }
  Vector exp_omega_inv() const;
  // E(Sigma^{-1}) = nu S^{-1} applied to b
  Matrix exp_sigma_inv_times(const Matrix& b) const;

  int occupied(double threshold = kOccupancyThreshold) const;
  double total_mass() const;
};

VariationalState init_state(const Hyperparameters& h);

// E_q{log p(y | theta_j)} under the current variational factors; shared by the
// batch allocation update and the recursive lower bound.
double expected_loglik(const Vector& y, const Vector& e,
                       const ComponentState& comp, double sigma_dof,
                       const SpdMatrix& sigma_scale,
                       const numstat::InvGammaParams& tau);

struct StateVersionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StateCorruptError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StateDimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SavedModel {
  VariationalState state;
  Hyperparameters hyper;
  basis::BasisMap basis;
};

constexpr int kStateSchemaVersion = 1;

void save_state(const VariationalState& s, const Hyperparameters& h,
                const basis::BasisMap& bm, const std::string& path);
SavedModel load_state(const std::string& path);

}  // namespace mdpreg::model
