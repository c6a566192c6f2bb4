#pragma once

#include "mvpln/rng.hpp"
#include "mvpln/types.hpp"

#include <functional>
#include <vector>

namespace mvpln {

/// Eigenvalue floor used by the PSD repair and smallest-count surrogate used
/// by the Taylor expansion point (log of a zero count is replaced by
/// log(eps_count)).
inline constexpr double kEpsPsd = 1e-8;
inline constexpr double kEpsCount = 0.5;

struct ChainDiagnostics {
  long proposals = 0;
  long accepted = 0;
  double acceptance_rate = 0.0;
  long psd_repairs = 0;
};

struct degenerate_chain_error : std::runtime_error {
  ChainDiagnostics diag;
  degenerate_chain_error(const std::string& msg, ChainDiagnostics d)
      : std::runtime_error(msg), diag(d) {}
};

/// Independence proposal fitted to the latent posterior: normal with mean at
/// the approximate posterior mode and covariance tau * (-H(mode))^{-1},
/// repaired to PSD when needed. The Cholesky factor is kept so that both
/// sampling and density evaluation cost O(q^2) per call.
struct TailoredProposal {
  Vector location;
  Matrix covariance;
  Eigen::LLT<Matrix> chol;
  double log_norm_const = 0.0;
  bool repaired = false;

  double log_density(const Vector& theta) const;
  Vector draw(RngStream& rng) const;
};

/// Approximate posterior mode of theta: one Newton-like step on the
/// stationarity condition in kappa = log theta, linearizing e^kappa at
/// kappa0 = log(max(y, eps_count)):
///   kappa = (diag(e^k0) + Omega)^{-1}
///           (y - 1 + Omega B^T x + diag(e^k0) k0 - e^k0)
/// Returns exp(kappa), strictly positive by construction.
Vector mode_location(const Vector& y, const Vector& x, const ModelFit& fit);

/// Symmetrizes M, clamps eigenvalues below kEpsPsd up to kEpsPsd and
/// reconstructs. Idempotent; leaves well-conditioned PD inputs unchanged up
/// to reconstruction rounding.
Matrix nearest_psd(const Matrix& M);
Matrix nearest_psd(const Matrix& M, bool& changed);

TailoredProposal build_proposal(const Vector& y, const Vector& x,
                                const ModelFit& fit, double tau);

struct MhResult {
  LatentBlock block;
  ChainDiagnostics diag;
};

/// Independence Metropolis-Hastings with a fixed proposal g. The chain
/// starts at g's location; candidates with a nonpositive coordinate are
/// rejected outright; on rejection the current state is retained. The first
/// burn_in states are discarded, then every thinning-th state is kept until
/// m rows are collected. Throws degenerate_chain_error if the acceptance
/// rate is below 1e-3 once 100*m proposals have been made.
MhResult run_independence_chain(const std::function<double(const Vector&)>& log_target,
                                const TailoredProposal& g, int m, int burn_in,
                                int thinning, RngStream& rng);

/// Tailored-proposal chain for one observation's latent posterior.
MhResult mh_sample(const Vector& y, const Vector& x, const ModelFit& fit,
                   const FitConfig& cfg, RngStream& rng);

struct EStepResult {
  std::vector<LatentBlock> blocks;
  std::vector<ChainDiagnostics> diags;
  double mean_acceptance = 0.0;
  long psd_repairs = 0;
};

/// Seed of the RNG substream observation j uses at the given EM iteration.
std::uint64_t e_step_substream_seed(const FitConfig& cfg, int em_iter, Index j);

/// Monte Carlo E-step: one chain per observation, each on its own RNG
/// substream keyed by (cfg.seed, em_iter, observation index), so the result
/// is identical for any thread count. threads <= 1 runs the serial
/// reference loop.
EStepResult e_step(const Dataset& data, const ModelFit& fit,
                   const FitConfig& cfg, int em_iter, int threads = 1);

}  // namespace mvpln
