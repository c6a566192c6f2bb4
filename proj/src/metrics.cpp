#include "mvpln/metrics.hpp"

#include "mvpln/baseline.hpp"
#include "mvpln/em.hpp"
#include "mvpln/rng.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace mvpln {

namespace {

constexpr std::uint64_t kSimRepTag = 0x53494D52ULL;
constexpr std::uint64_t kFitRepTag = 0x46495452ULL;

}  // namespace

double frobenius_error(const Matrix& truth, const Matrix& estimate) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols())
    throw std::invalid_argument("frobenius_error: shape mismatch");
  const double denom = truth.norm();
  if (denom <= 0.0)
    throw std::invalid_argument("frobenius_error: zero-norm truth");
  return (truth - estimate).norm() / denom;
}

RmseResult rmse(const Matrix& predicted, const Matrix& observed) {
  if (predicted.rows() != observed.rows() ||
      predicted.cols() != observed.cols())
    throw std::invalid_argument("rmse: shape mismatch");
  RmseResult out;
  out.per_response.resize(predicted.cols());
  for (Index i = 0; i < predicted.cols(); ++i)
    out.per_response[i] =
        std::sqrt((predicted.col(i) - observed.col(i)).squaredNorm() /
                  double(predicted.rows()));
  out.average = out.per_response.mean();
  return out;
}

MetricSummary summarize(const std::vector<MetricsReport>& reports,
                        const std::string& metric) {
  std::vector<double> values;
  for (const auto& r : reports) {
    if (!r.converged) continue;
    if (metric == "est_error_b") values.push_back(r.est_error_b);
    else if (metric == "est_error_omega") {
      if (r.has_omega_error) values.push_back(r.est_error_omega);
    } else if (metric == "rmse_avg") values.push_back(r.rmse_avg);
    else throw std::invalid_argument("summarize: unknown metric " + metric);
  }
  MetricSummary s;
  s.count = long(values.size());
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / double(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.se = std::sqrt(ss / double(values.size() - 1)) /
           std::sqrt(double(values.size()));
  }
  std::sort(values.begin(), values.end());
  const size_t h = values.size() / 2;
  s.median = values.size() % 2 ? values[h] : 0.5 * (values[h - 1] + values[h]);
  return s;
}

ReplicationSummary run_replications(const SimConfig& sim_cfg,
                                    const FitConfig& fit_cfg, int n_reps,
                                    int threads) {
  if (n_reps < 1) throw std::invalid_argument("run_replications: n_reps < 1");
  ReplicationSummary out;
  out.mvpln.resize(size_t(n_reps));
  out.baseline.resize(size_t(n_reps));

  const int outer_threads = std::max(1, threads);
  const int inner_threads = 1;  // replications own the parallelism

  const auto run_one = [&](int r) {
    SimConfig scfg = sim_cfg;
    scfg.seed = derive_seed(sim_cfg.seed, kSimRepTag, std::uint64_t(r));
    const SimInstance inst = gen_instance(scfg);

    {
      MetricsReport rep;
      const auto start = std::chrono::steady_clock::now();
      try {
        FitConfig fcfg = fit_cfg;
        fcfg.seed = derive_seed(fit_cfg.seed, kFitRepTag, std::uint64_t(r));
        const TuningResult tr = tune(inst.train, fcfg, inner_threads);
        const ModelFit& best = tr.best();
        rep.est_error_b = frobenius_error(inst.B_true, best.B);
        rep.est_error_omega = frobenius_error(inst.Omega_true, best.Omega);
        rep.has_omega_error = true;
        const RmseResult rr = rmse(predict(best, inst.test.X), inst.test.Y);
        rep.rmse_per_response = rr.per_response;
        rep.rmse_avg = rr.average;
        rep.converged = true;
      } catch (const std::exception&) {
        rep.converged = false;
      }
      rep.wall_seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
      out.mvpln[size_t(r)] = std::move(rep);
    }

    {
      MetricsReport rep;
      const auto start = std::chrono::steady_clock::now();
      try {
        const BaselineFit bf = fit_glmnet_style(inst.train);
        rep.converged = bf.valid;
        if (bf.valid) {
          rep.est_error_b = frobenius_error(inst.B_true, bf.coef_matrix());
          const RmseResult rr =
              rmse(predict_baseline(bf, inst.test.X), inst.test.Y);
          rep.rmse_per_response = rr.per_response;
          rep.rmse_avg = rr.average;
        }
      } catch (const std::exception&) {
        rep.converged = false;
      }
      rep.wall_seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
      out.baseline[size_t(r)] = std::move(rep);
    }
  };

  if (outer_threads <= 1) {
    for (int r = 0; r < n_reps; ++r) run_one(r);
  } else {
#pragma omp parallel for schedule(dynamic) num_threads(outer_threads)
    for (int r = 0; r < n_reps; ++r) run_one(r);
  }

  long conv_m = 0, conv_b = 0;
  for (const auto& r : out.mvpln) conv_m += r.converged ? 1 : 0;
  for (const auto& r : out.baseline) conv_b += r.converged ? 1 : 0;
  out.mvpln_convergence_rate = double(conv_m) / double(n_reps);
  out.baseline_convergence_rate = double(conv_b) / double(n_reps);
  return out;
}

}  // namespace mvpln
