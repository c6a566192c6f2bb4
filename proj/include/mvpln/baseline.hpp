#pragma once

#include "mvpln/types.hpp"

#include <vector>

namespace mvpln {

/// One response column's l1-penalized Poisson regression. converged reports
/// whether IRLS reached its tolerance; a false value is a status, not an
/// error (the comparison model is known not to always converge).
struct UniPoissonFit {
  Vector beta;       // p slopes
  double intercept = 0.0;
  double lambda = 0.0;
  bool converged = false;
};

/// Minimizes (1/n) sum_j [exp(eta_j) - y_j eta_j] + lambda ||beta||_1 with
/// eta = intercept + beta' x and the intercept unpenalized, by IRLS with an
/// inner cyclical coordinate-descent lasso solve and step-halving (up to 20
/// halvings) on the exact objective.
UniPoissonFit fit_uni_poisson(const Matrix& X, const Vector& y, double lambda,
                              int max_iter = 100, double tol = 1e-7,
                              const UniPoissonFit* init = nullptr);

/// Log-spaced penalty path from the smallest lambda that zeroes every slope
/// down to ratio * that value.
std::vector<double> default_lambda_grid(const Matrix& X, const Vector& y,
                                        int n_points = 20,
                                        double ratio = 1e-3);

/// Unpenalized Poisson log-likelihood sum_j [y_j eta_j - exp(eta_j)]
/// (constants that cancel in comparisons are dropped).
double poisson_loglik(const Matrix& X, const Vector& y,
                      const UniPoissonFit& fit);

struct BaselineFit {
  std::vector<UniPoissonFit> fits;  // one per response, BIC-selected
  // bic_table(i, l): BIC of response i at grid point l (infinite when that
  // point failed to converge)
  Matrix bic_table;
  std::vector<double> grid;
  bool valid = false;  // false if some response converged at no grid point

  /// Slopes stacked into a p x q matrix.
  Matrix coef_matrix() const;
};

/// Independent per-response lasso Poisson fits along a warm-started path,
/// each response's lambda picked by BIC = -2 loglik + v(beta) log n.
BaselineFit fit_glmnet_style(const Dataset& data,
                             const std::vector<double>& grid = {},
                             int max_iter = 100, double tol = 1e-7);

/// Yhat(j, i) = exp(intercept_i + beta_i' x_j).
Matrix predict_baseline(const BaselineFit& fit, const Matrix& X_new);

}  // namespace mvpln
