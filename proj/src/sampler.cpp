#include "mvpln/sampler.hpp"

#include "mvpln/model.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

namespace mvpln {

namespace {

constexpr std::uint64_t kEStepTag = 0x4553544550ULL;  // e_step substreams

}  // namespace

double TailoredProposal::log_density(const Vector& theta) const {
  const Vector d = theta - location;
  const Vector w = chol.matrixL().solve(d);
  return log_norm_const - 0.5 * w.squaredNorm();
}

Vector TailoredProposal::draw(RngStream& rng) const {
  const Vector z = rng.normal_vector(location.size());
  return location + chol.matrixL() * z;
}

Vector mode_location(const Vector& y, const Vector& x, const ModelFit& fit) {
  const Index q = y.size();
  for (Index i = 0; i < q; ++i)
    if (y[i] < 0.0) throw std::invalid_argument("mode_location: negative count");
  const Vector kappa0 =
      y.array().max(kEpsCount).log().matrix();  // log y, with zero counts floored
  const Vector ek0 = kappa0.array().exp();
  Matrix A = fit.Omega;
  A.diagonal() += ek0;
  const Vector rhs = (y.array() - 1.0).matrix() +
                     fit.Omega * (fit.B.transpose() * x) +
                     ek0.cwiseProduct(kappa0) - ek0;
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success)
    throw numerical_error("mode_location: singular linearized system");
  const Vector kappa = llt.solve(rhs);
  if (!kappa.allFinite())
    throw numerical_error("mode_location: non-finite solution");
  return kappa.array().exp();
}

Matrix nearest_psd(const Matrix& M, bool& changed) {
  if (!all_finite(M))
    throw std::invalid_argument("nearest_psd: non-finite entry");
  const Matrix sym = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  Vector ev = es.eigenvalues();
  changed = false;
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < kEpsPsd) {
      ev[i] = kEpsPsd;
      changed = true;
    }
  }
  if (!changed) return sym;
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Matrix nearest_psd(const Matrix& M) {
  bool changed = false;
  return nearest_psd(M, changed);
}

namespace {

Eigen::LLT<Matrix> factor_with_jitter(Matrix& C) {
  Eigen::LLT<Matrix> llt(C);
  double jitter = kEpsPsd;
  while (llt.info() != Eigen::Success && jitter <= 1e-2) {
    C.diagonal().array() += jitter;
    llt.compute(C);
    jitter *= 10.0;
  }
  if (llt.info() != Eigen::Success)
    throw numerical_error("build_proposal: proposal covariance not factorizable");
  return llt;
}

}  // namespace

TailoredProposal build_proposal(const Vector& y, const Vector& x,
                                const ModelFit& fit, double tau) {
  if (tau <= 0.0) throw std::invalid_argument("build_proposal: tau <= 0");
  TailoredProposal g;
  g.location = mode_location(y, x, fit);
  const Index q = y.size();
  const Matrix neg_hess = -joint_hessian(g.location, y, x, fit);
  Eigen::FullPivLU<Matrix> lu(neg_hess);
  if (lu.isInvertible()) {
    const Matrix raw = tau * lu.inverse();
    g.covariance = nearest_psd(raw, g.repaired);
  } else {
    // the curvature matrix collapsed; fall back to an isotropic proposal
    g.covariance = tau * Matrix::Identity(q, q);
    g.repaired = true;
  }
  Matrix C = g.covariance;
  g.chol = factor_with_jitter(C);
  double half_logdet = 0.0;
  const Matrix& lfac = g.chol.matrixLLT();
  for (Index i = 0; i < q; ++i) half_logdet += std::log(lfac(i, i));
  g.log_norm_const = -0.5 * double(q) * std::log(2.0 * M_PI) - half_logdet;
  return g;
}

MhResult run_independence_chain(
    const std::function<double(const Vector&)>& log_target,
    const TailoredProposal& g, int m, int burn_in, int thinning,
    RngStream& rng) {
  if (m < 1) throw std::invalid_argument("run_independence_chain: m < 1");
  const Index q = g.location.size();
  MhResult out;
  out.block.theta.resize(m, q);
  out.diag.psd_repairs = g.repaired ? 1 : 0;

  Vector cur = g.location;
  double log_w_cur = log_target(cur) - g.log_density(cur);

  const long proposal_cap = 100L * m;
  long step = 0;
  int kept = 0;
  while (kept < m) {
    ++step;
    const Vector cand = g.draw(rng);
    ++out.diag.proposals;
    if ((cand.array() > 0.0).all()) {
      const double log_w_cand = log_target(cand) - g.log_density(cand);
      const double log_alpha = log_w_cand - log_w_cur;
      // log u with u in (0,1]; alpha >= 1 accepts unconditionally
      if (log_alpha >= 0.0 || std::log(1.0 - rng.uniform()) < log_alpha) {
        cur = cand;
        log_w_cur = log_w_cand;
        ++out.diag.accepted;
      }
    }
    if (step > burn_in && (step - burn_in) % thinning == 0)
      out.block.theta.row(kept++) = cur.transpose();
    if (out.diag.proposals >= proposal_cap &&
        double(out.diag.accepted) < 1e-3 * double(out.diag.proposals)) {
      out.diag.acceptance_rate =
          double(out.diag.accepted) / double(out.diag.proposals);
      throw degenerate_chain_error("independence chain is degenerate", out.diag);
    }
  }
  out.diag.acceptance_rate =
      double(out.diag.accepted) / double(out.diag.proposals);
  return out;
}

MhResult mh_sample(const Vector& y, const Vector& x, const ModelFit& fit,
                   const FitConfig& cfg, RngStream& rng) {
  const TailoredProposal g = build_proposal(y, x, fit, cfg.tau);
  const auto target = [&](const Vector& theta) {
    return joint_log_density(y, theta, x, fit);
  };
  return run_independence_chain(target, g, cfg.m, cfg.burn_in, cfg.thinning,
                                rng);
}

std::uint64_t e_step_substream_seed(const FitConfig& cfg, int em_iter,
                                    Index j) {
  return derive_seed(cfg.seed ^ kEStepTag, std::uint64_t(em_iter),
                     std::uint64_t(j));
}

EStepResult e_step(const Dataset& data, const ModelFit& fit,
                   const FitConfig& cfg, int em_iter, int threads) {
  const Index n = data.n();
  EStepResult out;
  out.blocks.resize(n);
  out.diags.resize(n);

  std::vector<std::string> errors(n);
  std::vector<char> failed(n, 0);

  const auto run_one = [&](Index j) {
    RngStream rng(e_step_substream_seed(cfg, em_iter, j));
    try {
      MhResult r = mh_sample(data.Y.row(j).transpose(), data.X.row(j).transpose(),
                             fit, cfg, rng);
      out.blocks[j] = std::move(r.block);
      out.diags[j] = r.diag;
    } catch (const std::exception& e) {
      failed[j] = 1;
      errors[j] = e.what();
    }
  };

  if (threads <= 1) {
    for (Index j = 0; j < n; ++j) run_one(j);
  } else {
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (Index j = 0; j < n; ++j) run_one(j);
  }

  for (Index j = 0; j < n; ++j) {
    if (failed[j])
      throw degenerate_chain_error("e_step failed at observation " +
                                       std::to_string(j) + ": " + errors[j],
                                   out.diags[j]);
  }

  double acc = 0.0;
  for (const auto& d : out.diags) {
    acc += d.acceptance_rate;
    out.psd_repairs += d.psd_repairs;
  }
  out.mean_acceptance = n > 0 ? acc / double(n) : 0.0;
  return out;
}

}  // namespace mvpln
