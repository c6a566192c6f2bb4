#include "mvpln/em.hpp"

#include "mvpln/baseline.hpp"
#include "mvpln/model.hpp"
#include "mvpln/mstep.hpp"
#include "mvpln/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <utility>

namespace mvpln {

namespace {

constexpr std::uint64_t kGridTag = 0x4752494440ULL;
constexpr int kEbicEStepIter = 1 << 28;  // distinct from any EM iteration index
constexpr int kEbicSampleFactor = 5;

Matrix initial_coefficients(const Dataset& data) {
  Matrix B = Matrix::Zero(data.p(), data.q());
  try {
    const BaselineFit warm = fit_glmnet_style(data);
    const Matrix C = warm.coef_matrix();
    if (C.rows() == data.p() && C.cols() == data.q() && all_finite(C)) B = C;
  } catch (const std::exception&) {
    // fall back to zeros; the EM handles a cold start
  }
  return B;
}

}  // namespace

double approx_expected_loglik(const Dataset& data,
                              const std::vector<LatentBlock>& blocks,
                              const ModelFit& fit) {
  const Index n = data.n();
  if (Index(blocks.size()) != n)
    throw std::invalid_argument("approx_expected_loglik: block count != n");
  double total = 0.0;
  for (Index j = 0; j < n; ++j) {
    const Vector y = data.Y.row(j).transpose();
    const Vector x = data.X.row(j).transpose();
    const Index m = blocks[j].theta.rows();
    double acc = 0.0;
    for (Index t = 0; t < m; ++t)
      acc += joint_log_density(y, blocks[j].theta.row(t).transpose(), x, fit);
    total += acc / double(m);
  }
  return total / double(n);
}

FitResult fit(const Dataset& data, double lambda1, double lambda2,
              const FitConfig& cfg, int threads, const ModelFit* warm) {
  data.validate();
  cfg.validate();
  if (lambda1 < 0.0 || lambda2 < 0.0)
    throw std::invalid_argument("fit: negative penalty");

  ModelFit cur;
  if (warm) {
    cur = *warm;
  } else {
    cur.B = initial_coefficients(data);
    cur.Omega = Matrix::Identity(data.q(), data.q());
  }
  cur.lambda1 = lambda1;
  cur.lambda2 = lambda2;

  FitResult out;
  int consecutive_small = 0;
  double prev_q = std::numeric_limits<double>::quiet_NaN();
  for (int t = 0; t < cfg.em_max_iter; ++t) {
    const auto start = std::chrono::steady_clock::now();
    const EStepResult es = e_step(data, cur, cfg, t, threads);
    const double qtilde = approx_expected_loglik(data, es.blocks, cur);
    const MStepResult ms = m_step(data, es.blocks, cur, lambda1, lambda2, cfg);

    EMIterRecord rec;
    rec.iter = t;
    rec.qtilde = qtilde;
    rec.objective = mstep_objective(data, es.blocks, ms.fit.B, ms.fit.Omega,
                                    lambda1, lambda2);
    rec.delta_b = max_abs_diff(ms.fit.B, cur.B);
    rec.delta_omega = max_abs_diff(ms.fit.Omega, cur.Omega);
    rec.acceptance_rate = es.mean_acceptance;
    rec.psd_repairs = es.psd_repairs;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    out.trace.iters.push_back(rec);

    cur = ms.fit;
    if (t > 0) {
      const double rel = std::abs(qtilde - prev_q) / (std::abs(prev_q) + 1.0);
      consecutive_small = rel < cfg.em_tol ? consecutive_small + 1 : 0;
      if (consecutive_small >= 3) {
        out.trace.converged = true;
        break;
      }
    }
    prev_q = qtilde;
  }
  out.fit = cur;
  return out;
}

double ebic(double qtilde_sum, long v_b, long v_omega, long n, long p, long q,
            double gamma) {
  if (v_b < 0 || v_omega < 0)
    throw std::invalid_argument("ebic: negative nonzero counts");
  return -2.0 * qtilde_sum + double(v_b + v_omega) * std::log(double(n)) +
         2.0 * gamma * double(v_b) * std::log(double(p) * double(q)) +
         4.0 * gamma * double(v_omega) * std::log(double(q));
}

TuningResult tune(const Dataset& data, const FitConfig& cfg, int threads) {
  data.validate();
  cfg.validate();

  std::vector<std::pair<double, double>> grid;
  for (double l1 : cfg.lambda1_grid)
    for (double l2 : cfg.lambda2_grid) grid.emplace_back(l1, l2);
  std::sort(grid.begin(), grid.end(), std::greater<>());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  TuningResult out;
  const ModelFit* warm = nullptr;
  ModelFit warm_store;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    TuningEntry entry;
    entry.lambda1 = grid[g].first;
    entry.lambda2 = grid[g].second;
    FitConfig point_cfg = cfg;
    point_cfg.seed = derive_seed(cfg.seed, kGridTag, g);
    try {
      FitResult fr =
          fit(data, entry.lambda1, entry.lambda2, point_cfg, threads, warm);
      // re-estimate qtilde with a larger MC sample to steady the selection
      FitConfig ebic_cfg = point_cfg;
      ebic_cfg.m = cfg.m * kEbicSampleFactor;
      const EStepResult es =
          e_step(data, fr.fit, ebic_cfg, kEbicEStepIter, threads);
      const double qtilde_sum =
          double(data.n()) * approx_expected_loglik(data, es.blocks, fr.fit);
      entry.v_b = count_nonzero(fr.fit.B, kEpsZero);
      entry.v_omega = count_nonzero(fr.fit.Omega, kEpsZero);
      entry.ebic = ebic(qtilde_sum, entry.v_b, entry.v_omega, data.n(),
                        data.p(), data.q(), cfg.gamma);
      entry.fit = fr.fit;
      entry.converged = fr.trace.converged;
      entry.ok = true;
      warm_store = fr.fit;
      warm = &warm_store;
    } catch (const std::exception& e) {
      entry.ok = false;
      entry.error = e.what();
    }
    out.entries.push_back(std::move(entry));
  }

  bool any_ok = false;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < out.entries.size(); ++g) {
    const auto& e = out.entries[g];
    if (!e.ok) continue;
    // entries are in descending (lambda1, lambda2) order, so a strict
    // comparison breaks ties toward the larger pair
    if (!any_ok || e.ebic < best) {
      best = e.ebic;
      out.selected = g;
      any_ok = true;
    }
  }
  if (!any_ok) throw convergence_error("tune: every grid point failed", 0.0);
  return out;
}

Matrix predict(const ModelFit& fit, const Matrix& X_new) {
  if (X_new.cols() != fit.p())
    throw std::invalid_argument("predict: predictor count mismatch");
  const Matrix sigma = fit.sigma();
  const Vector half_var = 0.5 * sigma.diagonal();
  Matrix eta = X_new * fit.B;
  eta.rowwise() += half_var.transpose();
  return eta.array().exp().matrix();
}

}  // namespace mvpln
