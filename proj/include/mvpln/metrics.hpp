#pragma once

#include "mvpln/simgen.hpp"
#include "mvpln/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mvpln {

/// ||truth - estimate||_F / ||truth||_F.
double frobenius_error(const Matrix& truth, const Matrix& estimate);

struct RmseResult {
  Vector per_response;
  double average = 0.0;
};

/// Per-column sqrt(mean squared error) and their unweighted mean.
RmseResult rmse(const Matrix& predicted, const Matrix& observed);

struct MetricsReport {
  double est_error_b = 0.0;
  double est_error_omega = 0.0;
  bool has_omega_error = false;  // the baseline estimates no precision matrix
  Vector rmse_per_response;
  double rmse_avg = 0.0;
  bool converged = false;
  double wall_seconds = 0.0;  // informational; never written to artifacts
};

struct MetricSummary {
  double mean = 0.0;
  double se = 0.0;
  double median = 0.0;
  long count = 0;  // converged replications entering the summary
};

struct ReplicationSummary {
  std::vector<MetricsReport> mvpln;
  std::vector<MetricsReport> baseline;
  double mvpln_convergence_rate = 0.0;
  double baseline_convergence_rate = 0.0;
};

/// Mean / standard error / median of one metric over the converged
/// replications of `reports`.
MetricSummary summarize(const std::vector<MetricsReport>& reports,
                        const std::string& metric);

/// Runs n_reps independent simulate-fit-score comparisons of the MVPLN model
/// (EBIC-tuned) against the per-response lasso baseline. Replication r draws
/// its instance from (sim_cfg.seed, r) and its fit seeds from
/// (fit_cfg.seed, r), so the result does not depend on thread count.
/// Non-converged runs keep their slot (converged = false) and are skipped by
/// summarize, but count in the convergence-rate denominator.
ReplicationSummary run_replications(const SimConfig& sim_cfg,
                                    const FitConfig& fit_cfg, int n_reps,
                                    int threads = 1);

}  // namespace mvpln
