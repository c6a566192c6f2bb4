#pragma once

#include "mvpln/sampler.hpp"
#include "mvpln/types.hpp"

#include <string>
#include <vector>

namespace mvpln {

struct EMIterRecord {
  int iter = 0;
  double qtilde = 0.0;     // per-observation approximate expected log-likelihood
  double objective = 0.0;  // exact penalized M-step objective after the sweep
  double delta_b = 0.0;
  double delta_omega = 0.0;
  double acceptance_rate = 0.0;
  long psd_repairs = 0;
  double wall_seconds = 0.0;  // informational; never written to artifacts
};

struct EMTrace {
  std::vector<EMIterRecord> iters;
  bool converged = false;
};

struct FitResult {
  ModelFit fit;
  EMTrace trace;
};

/// Full MCEM fit at one (lambda1, lambda2) point. B starts from the
/// per-response baseline lasso fits (zeros if those fail) and Omega from the
/// identity unless a warm start is supplied. Stops when the relative change
/// of qtilde stays below cfg.em_tol for three consecutive iterations, or at
/// cfg.em_max_iter.
FitResult fit(const Dataset& data, double lambda1, double lambda2,
              const FitConfig& cfg, int threads = 1,
              const ModelFit* warm = nullptr);

/// (1/n) sum_j (1/m) sum_t log p(y_j, theta_j^(t) | x_j). The EBIC consumes
/// the unnormalized sum, i.e. n times this value.
double approx_expected_loglik(const Dataset& data,
                              const std::vector<LatentBlock>& blocks,
                              const ModelFit& fit);

/// EBIC = -2 qtilde_sum + (v_b + v_omega) log n
///        + 2 gamma v_b log(pq) + 4 gamma v_omega log q.
double ebic(double qtilde_sum, long v_b, long v_omega, long n, long p, long q,
            double gamma);

struct TuningEntry {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double ebic = 0.0;
  long v_b = 0;
  long v_omega = 0;
  ModelFit fit;
  bool converged = false;  // EM stopping rule reached
  bool ok = false;         // fit completed without error
  std::string error;
};

struct TuningResult {
  std::vector<TuningEntry> entries;  // descending (lambda1, lambda2) order
  std::size_t selected = 0;

  const ModelFit& best() const { return entries[selected].fit; }
};

/// Fits every (lambda1, lambda2) pair of the grids in descending order with
/// warm starts, evaluates EBIC on a fresh E-step with 5x the configured MC
/// sample count, and selects the minimizer (ties go to the larger pair).
/// Grid points that fail are recorded and skipped; if all fail, throws.
TuningResult tune(const Dataset& data, const FitConfig& cfg, int threads = 1);

/// Conditional mean of the counts: Yhat(j, i) = exp(b_i' x_j + Sigma_ii / 2)
/// with Sigma = Omega^{-1}.
Matrix predict(const ModelFit& fit, const Matrix& X_new);

}  // namespace mvpln
