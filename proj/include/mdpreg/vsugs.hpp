#pragma once

#include "mdpreg/basis.hpp"
#include "mdpreg/batchvb.hpp"
#include "mdpreg/model.hpp"

namespace mdpreg::vsugs {

// Soft assignment of one incoming observation over the candidate components
// {1..min(i,T)}.
struct AllocProbs {
  Vector probs;
  Vector log_marginals;
  Vector log_prior_weights;  // log r_ij

  int candidates() const { return static_cast<int>(probs.size()); }
  Vector padded(int trunc) const;
};

// Accumulate follows the algorithm literally: each observation's residual
// term is evaluated once, at its own step, and summed. Recompute re-applies
// the current E(Sigma^{-1}) to the running residual scatter instead.
enum class TauRateMode { accumulate, recompute };

// Log of the tau-plug-in closed form of the allocation integral for
// component j, evaluated at the (i-1) state.
double component_marginal_loglik(const Vector& y, const Vector& e,
                                 const model::VariationalState& s, int j);

AllocProbs alloc_probs(const Vector& y, const Vector& e,
                       const model::VariationalState& s, double alpha);

// One Algorithm-step update of every global factor given the soft assignment
// of observation i = seen+1 (accumulate mode).
void assimilate_one(const Vector& y, const Vector& e,
                    const model::Hyperparameters& h, const Vector& probs,
                    model::VariationalState& s);

// Sequential fitter holding the state recursion plus the residual
// accumulators needed by the recompute tau mode.
class OnlineFitter {
 public:
  OnlineFitter(const model::Hyperparameters& h,
               TauRateMode mode = TauRateMode::accumulate);

  // Transfer a batch warm start: global factors move over unchanged, masses
  // become the allocation column sums.
  void seed_from_batch(const batchvb::FitResult& warm, const Matrix& y,
                       const Matrix& designs);

  // Assimilates the next observation and returns the allocation it used.
  AllocProbs step(const Vector& y, const Vector& e);

  const model::VariationalState& state() const { return state_; }

 private:
  model::Hyperparameters hyper_;
  model::VariationalState state_;
  TauRateMode mode_;
  Matrix resid_scatter_;      // recompute mode: sum of q-weighted residual outer products
  double design_quad_sum_ = 0.0;
};

struct Options {
  long warm_count = 0;
  std::uint64_t seed = 0;
  TauRateMode tau_mode = TauRateMode::accumulate;
  int warm_max_iter = 100;
  double warm_tol = 1e-8;
  bool keep_alloc_history = false;
};

struct OnlineResult {
  model::VariationalState state;
  Matrix alloc_history;  // n x T when requested, else empty
  batchvb::Diagnostics warm_diagnostics;
};

// Batch warm start on the first warm_count rows, then one pass of sequential
// assimilation over the remainder in arrival order.
OnlineResult fit_online(const Matrix& x_raw, const Matrix& y,
                        const model::Hyperparameters& h,
                        const basis::BasisMap& bm, const Options& opts);

OnlineResult fit_online_designs(const Matrix& designs, const Matrix& y,
                                const model::Hyperparameters& h,
                                const Options& opts);

}  // namespace mdpreg::vsugs
