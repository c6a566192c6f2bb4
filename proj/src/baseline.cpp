#include "mvpln/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mvpln {

namespace {

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

Vector linear_predictor(const Matrix& X, double b0, const Vector& beta) {
  Vector eta = X.cols() > 0 ? Vector(X * beta) : Vector::Zero(X.rows());
  eta.array() += b0;
  return eta;
}

double objective(const Matrix& X, const Vector& y, double b0,
                 const Vector& beta, double lambda) {
  const Vector eta = linear_predictor(X, b0, beta);
  if (eta.maxCoeff() > 700.0) return std::numeric_limits<double>::infinity();
  return (eta.array().exp() - y.array() * eta.array()).mean() +
         lambda * beta.cwiseAbs().sum();
}

}  // namespace

UniPoissonFit fit_uni_poisson(const Matrix& X, const Vector& y, double lambda,
                              int max_iter, double tol,
                              const UniPoissonFit* init) {
  const Index n = y.size();
  const Index p = X.cols();
  if (p > 0 && X.rows() != n)
    throw std::invalid_argument("fit_uni_poisson: X and y sizes disagree");
  for (Index j = 0; j < n; ++j)
    if (!(y[j] >= 0.0) || y[j] != std::floor(y[j]))
      throw std::invalid_argument(
          "fit_uni_poisson: counts must be nonnegative integers");
  if (lambda < 0.0) throw std::invalid_argument("fit_uni_poisson: lambda < 0");

  UniPoissonFit fit;
  fit.lambda = lambda;
  if (init && init->beta.size() == p) {
    fit.beta = init->beta;
    fit.intercept = init->intercept;
  } else {
    fit.beta = Vector::Zero(p);
    fit.intercept = std::log(std::max(y.mean(), 1e-10));
  }

  double obj = objective(X, y, fit.intercept, fit.beta, lambda);
  if (!std::isfinite(obj)) return fit;
  for (int iter = 0; iter < max_iter; ++iter) {
    const Vector eta = linear_predictor(X, fit.intercept, fit.beta);
    if (eta.maxCoeff() > 700.0) return fit;  // diverged; converged stays false
    const Vector mu = eta.array().exp().matrix();
    const Vector w = mu.cwiseMax(1e-10);
    const Vector z = eta + (y - mu).cwiseQuotient(w);

    // weighted lasso: (1/2n) sum_j w_j (z_j - b0 - x_j'b)^2 + lambda ||b||_1
    double b0 = fit.intercept;
    Vector beta = fit.beta;
    Vector r = z - linear_predictor(X, b0, beta);
    const double wsum = w.sum();
    Vector wxx(p);
    for (Index k = 0; k < p; ++k)
      wxx[k] = w.cwiseProduct(X.col(k).cwiseAbs2()).sum() / double(n);
    for (int pass = 0; pass < 1000; ++pass) {
      double max_delta = 0.0;
      for (Index k = 0; k < p; ++k) {
        if (wxx[k] <= 0.0) continue;  // constant-zero predictor
        const double old = beta[k];
        const double rho =
            w.cwiseProduct(X.col(k)).dot(r) / double(n) + wxx[k] * old;
        const double bk = soft_threshold(rho, lambda) / wxx[k];
        if (bk != old) {
          r -= (bk - old) * X.col(k);
          beta[k] = bk;
          max_delta = std::max(max_delta, std::abs(bk - old));
        }
      }
      const double shift = w.dot(r) / wsum;
      if (shift != 0.0) {
        b0 += shift;
        r.array() -= shift;
        max_delta = std::max(max_delta, std::abs(shift));
      }
      if (max_delta < 0.1 * tol) break;
    }

    // step-halve towards the IRLS solution on the exact objective
    bool improved = false;
    double step = 1.0;
    double cand_b0 = b0, cand_obj = obj;
    Vector cand_beta = beta;
    for (int h = 0; h < 20; ++h) {
      cand_b0 = fit.intercept + step * (b0 - fit.intercept);
      cand_beta = fit.beta + step * (beta - fit.beta);
      cand_obj = objective(X, y, cand_b0, cand_beta, lambda);
      if (cand_obj <= obj + 1e-12) {
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) return fit;  // diverged

    const double delta = std::max((cand_beta - fit.beta).cwiseAbs().maxCoeff(),
                                  std::abs(cand_b0 - fit.intercept));
    fit.intercept = cand_b0;
    fit.beta = cand_beta;
    obj = cand_obj;
    if (delta < tol) {
      fit.converged = true;
      return fit;
    }
  }
  return fit;
}

std::vector<double> default_lambda_grid(const Matrix& X, const Vector& y,
                                        int n_points, double ratio) {
  if (n_points < 1) throw std::invalid_argument("default_lambda_grid: n_points < 1");
  const double n = double(y.size());
  const double ybar = y.mean();
  const Vector centered = (y.array() - ybar).matrix();
  double lambda_max = 0.0;
  for (Index k = 0; k < X.cols(); ++k)
    lambda_max = std::max(lambda_max, std::abs(X.col(k).dot(centered)) / n);
  if (lambda_max <= 0.0) lambda_max = 1.0;
  std::vector<double> grid(static_cast<size_t>(n_points), 0.0);
  const double hi = std::log(lambda_max);
  const double lo = std::log(lambda_max * ratio);
  for (int i = 0; i < n_points; ++i) {
    const double t = n_points == 1 ? 0.0 : double(i) / double(n_points - 1);
    grid[size_t(i)] = std::exp(hi + t * (lo - hi));  // descending
  }
  return grid;
}

double poisson_loglik(const Matrix& X, const Vector& y,
                      const UniPoissonFit& fit) {
  const Vector eta = linear_predictor(X, fit.intercept, fit.beta);
  return (y.array() * eta.array() - eta.array().exp()).sum();
}

Matrix BaselineFit::coef_matrix() const {
  if (fits.empty()) return Matrix();
  Matrix B(fits.front().beta.size(), Index(fits.size()));
  for (Index i = 0; i < B.cols(); ++i) B.col(i) = fits[size_t(i)].beta;
  return B;
}

BaselineFit fit_glmnet_style(const Dataset& data,
                             const std::vector<double>& grid_in, int max_iter,
                             double tol) {
  data.validate();
  const Index n = data.n();
  const Index q = data.q();
  BaselineFit out;
  out.valid = true;
  out.fits.resize(size_t(q));

  for (Index i = 0; i < q; ++i) {
    const Vector y = data.Y.col(i);
    std::vector<double> grid =
        grid_in.empty() ? default_lambda_grid(data.X, y) : grid_in;
    if (grid.empty()) throw std::invalid_argument("fit_glmnet_style: empty grid");
    std::sort(grid.begin(), grid.end(), std::greater<>());
    if (i == 0) {
      out.grid = grid;
      out.bic_table = Matrix::Constant(q, Index(grid.size()),
                                       std::numeric_limits<double>::infinity());
    }

    UniPoissonFit warm;
    bool have_warm = false;
    double best_bic = std::numeric_limits<double>::infinity();
    UniPoissonFit best;
    bool any_converged = false;
    for (size_t l = 0; l < grid.size(); ++l) {
      const UniPoissonFit f = fit_uni_poisson(data.X, y, grid[l], max_iter,
                                              tol, have_warm ? &warm : nullptr);
      if (!f.converged) continue;
      any_converged = true;
      warm = f;
      have_warm = true;
      const long v = count_nonzero(f.beta, 1e-12);
      const double bic = -2.0 * poisson_loglik(data.X, y, f) +
                         double(v) * std::log(double(n));
      out.bic_table(i, Index(l)) = bic;
      if (bic < best_bic) {
        best_bic = bic;
        best = f;
      }
    }
    if (!any_converged) {
      out.valid = false;
      best.beta = Vector::Zero(data.p());
      best.intercept = std::log(std::max(y.mean(), 1e-10));
      best.converged = false;
      best.lambda = grid.front();
    }
    out.fits[size_t(i)] = best;
  }
  return out;
}

Matrix predict_baseline(const BaselineFit& fit, const Matrix& X_new) {
  const Index q = Index(fit.fits.size());
  Matrix yhat(X_new.rows(), q);
  for (Index i = 0; i < q; ++i) {
    const auto& f = fit.fits[size_t(i)];
    if (f.beta.size() != X_new.cols())
      throw std::invalid_argument("predict_baseline: predictor count mismatch");
    yhat.col(i) = ((X_new * f.beta).array() + f.intercept).exp().matrix();
  }
  return yhat;
}

}  // namespace mvpln
