#pragma once

#include <cstdint>
#include <vector>

#include "mdpreg/model.hpp"

namespace mdpreg::batchvb {

struct Options {
  int max_iter = 100;
  double tol = 1e-8;
  std::uint64_t seed = 0;
};

struct Diagnostics {
  std::vector<double> sweep_max_change;
  bool converged = false;
};

// n x T row-stochastic soft assignments; q(i,j) = 0 for j > min(i,T) with
// rows counted from 1.
using AllocationTable = Matrix;

AllocationTable random_one_hot_init(long n, int trunc, numstat::Rng& rng);

// Mean field update for (beta_j, V_j) and (nu_hat, S_hat).
void update_global(const Matrix& y, const Matrix& designs,
                   const AllocationTable& alloc,
                   const model::Hyperparameters& h, model::VariationalState& s);

// Mean field update for q(tau); requires the global factors of this sweep.
void update_tau(const Matrix& y, const Matrix& designs,
                const AllocationTable& alloc, const model::Hyperparameters& h,
                model::VariationalState& s);

// Mean field update for the q(omega_k).
void update_omega(const model::Hyperparameters& h, model::VariationalState& s);

// Allocation update; reads the previous sweep's table for the occupied-mass
// sums (Jacobi style) and returns the new table.
AllocationTable update_delta(const Matrix& y, const Matrix& designs,
                             const AllocationTable& alloc_prev,
                             const model::Hyperparameters& h,
                             const model::VariationalState& s);

struct FitResult {
  model::VariationalState state;
  AllocationTable alloc;
  Diagnostics diagnostics;
};

FitResult fit_batch(const Matrix& y, const Matrix& designs,
                    const model::Hyperparameters& h, const Options& opts);

}  // namespace mdpreg::batchvb
