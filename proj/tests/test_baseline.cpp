#include "mvpln/baseline.hpp"

#include "oracles.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace mvpln;
using testutil::random_matrix;

namespace {

// counts from a univariate Poisson GLM with true coefficients
Dataset simulate_poisson(Index n, Index p, RngStream& rng, double b0,
                         const Vector& beta) {
  Dataset d;
  d.X = random_matrix(n, p, rng);
  d.Y.resize(n, 1);
  for (Index j = 0; j < n; ++j) {
    const double eta = b0 + d.X.row(j).dot(beta);
    d.Y(j, 0) = double(rng.poisson(std::exp(eta)));
  }
  return d;
}

double unpenalized_gradient(const Matrix& X, const Vector& y,
                            const UniPoissonFit& fit, Index k) {
  Vector eta = X * fit.beta;
  eta.array() += fit.intercept;
  const Vector mu = eta.array().exp().matrix();
  return X.col(k).dot(mu - y) / double(y.size());
}

}  // namespace

TEST_CASE("intercept-only fit is the log of the mean count") {
  Vector y(5);
  y << 0, 3, 1, 2, 4;
  const Matrix X(5, 0);
  const UniPoissonFit fit = fit_uni_poisson(X, y, 0.7);
  CHECK(fit.converged);
  CHECK(fit.intercept == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(fit.beta.size() == 0);
}

TEST_CASE("unpenalized fit matches a damped-Newton oracle") {
  RngStream rng(107);
  Vector beta_true(3);
  beta_true << 0.6, -0.4, 0.2;
  const Dataset d = simulate_poisson(100, 3, rng, 0.5, beta_true);
  const UniPoissonFit fit = fit_uni_poisson(d.X, d.Y.col(0), 0.0, 200, 1e-10);
  CHECK(fit.converged);
  const auto [b0, slopes] = oracles::newton_poisson(d.X, d.Y.col(0));
  CHECK(std::abs(fit.intercept - b0) < 1e-5);
  CHECK((fit.beta - slopes).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("an overwhelming penalty zeroes every slope") {
  RngStream rng(109);
  Vector beta_true(2);
  beta_true << 0.3, -0.2;
  const Dataset d = simulate_poisson(50, 2, rng, 0.8, beta_true);
  const UniPoissonFit fit = fit_uni_poisson(d.X, d.Y.col(0), 1e6);
  CHECK(fit.converged);
  CHECK(fit.beta.cwiseAbs().maxCoeff() == 0.0);
  CHECK(fit.intercept ==
        doctest::Approx(std::log(d.Y.col(0).mean())).epsilon(1e-6));
}

TEST_CASE("converged fits satisfy the lasso KKT conditions") {
  RngStream rng(113);
  Vector beta_true(4);
  beta_true << 0.7, 0.0, -0.5, 0.0;
  const Dataset d = simulate_poisson(120, 4, rng, 0.4, beta_true);
  const double lambda = 0.05;
  const UniPoissonFit fit = fit_uni_poisson(d.X, d.Y.col(0), lambda, 200, 1e-10);
  REQUIRE(fit.converged);
  for (Index k = 0; k < 4; ++k) {
    const double g = unpenalized_gradient(d.X, d.Y.col(0), fit, k);
    if (fit.beta[k] == 0.0) {
      CHECK(std::abs(g) <= lambda + 1e-5);
    } else {
      const double sign = fit.beta[k] > 0 ? 1.0 : -1.0;
      CHECK(std::abs(g + lambda * sign) <= 1e-5);
    }
  }
}

TEST_CASE("nonzero count is monotone along the penalty path") {
  RngStream rng(127);
  Vector beta_true(5);
  beta_true << 0.8, -0.6, 0.4, 0.0, 0.0;
  const Dataset d = simulate_poisson(80, 5, rng, 0.5, beta_true);
  const auto grid = default_lambda_grid(d.X, d.Y.col(0), 25);
  long prev = -1;  // grid is descending, so counts may only grow
  UniPoissonFit warm;
  bool have_warm = false;
  for (double lambda : grid) {
    const UniPoissonFit fit = fit_uni_poisson(d.X, d.Y.col(0), lambda, 100,
                                              1e-8, have_warm ? &warm : nullptr);
    if (!fit.converged) continue;
    const long v = count_nonzero(fit.beta, 1e-12);
    if (prev >= 0) CHECK(v >= prev);
    prev = v;
    warm = fit;
    have_warm = true;
  }
  CHECK(prev >= 0);
}

TEST_CASE("objective is non-increasing across IRLS iterations") {
  RngStream rng(131);
  Vector beta_true(3);
  beta_true << 0.5, -0.3, 0.2;
  const Dataset d = simulate_poisson(60, 3, rng, 0.6, beta_true);
  const auto objective = [&](const UniPoissonFit& f) {
    Vector eta = d.X * f.beta;
    eta.array() += f.intercept;
    return (eta.array().exp() - d.Y.col(0).array() * eta.array()).mean() +
           0.1 * f.beta.cwiseAbs().sum();
  };
  double prev = std::numeric_limits<double>::infinity();
  for (int iters = 1; iters <= 8; ++iters) {
    const UniPoissonFit f = fit_uni_poisson(d.X, d.Y.col(0), 0.1, iters, 1e-14);
    const double obj = objective(f);
    CHECK(obj <= prev + 1e-12);
    prev = obj;
  }
}

TEST_CASE("non-convergence is a reported status") {
  RngStream rng(137);
  Vector beta_true(3);
  beta_true << 0.5, -0.3, 0.2;
  const Dataset d = simulate_poisson(60, 3, rng, 0.6, beta_true);
  const UniPoissonFit f = fit_uni_poisson(d.X, d.Y.col(0), 0.01, 1, 1e-14);
  CHECK_FALSE(f.converged);
  CHECK(all_finite(f.beta));
}

TEST_CASE("fit_glmnet_style selects by BIC and reports a consistent table") {
  RngStream rng(139);
  Dataset d;
  d.X = random_matrix(60, 3, rng);
  d.Y.resize(60, 2);
  Vector b1(3), b2(3);
  b1 << 0.7, 0.0, -0.4;
  b2 << 0.0, 0.5, 0.3;
  for (Index j = 0; j < 60; ++j) {
    d.Y(j, 0) = double(rng.poisson(std::exp(0.4 + d.X.row(j).dot(b1))));
    d.Y(j, 1) = double(rng.poisson(std::exp(0.2 + d.X.row(j).dot(b2))));
  }
  const BaselineFit bf = fit_glmnet_style(d);
  CHECK(bf.valid);
  REQUIRE(bf.fits.size() == 2);
  CHECK(bf.coef_matrix().rows() == 3);
  CHECK(bf.coef_matrix().cols() == 2);

  // the stored fit's BIC matches recomputation and is the row minimum
  for (Index i = 0; i < 2; ++i) {
    const auto& f = bf.fits[size_t(i)];
    CHECK(f.converged);
    const double bic = -2.0 * poisson_loglik(d.X, d.Y.col(i), f) +
                       double(count_nonzero(f.beta, 1e-12)) * std::log(60.0);
    CHECK(bic == doctest::Approx(bf.bic_table.row(i).minCoeff()).epsilon(1e-10));
  }
}

TEST_CASE("every-point failure marks the estimation invalid") {
  RngStream rng(149);
  Vector beta_true(2);
  beta_true << 0.4, -0.3;
  const Dataset d = simulate_poisson(40, 2, rng, 0.5, beta_true);
  // an unreachable tolerance forces non-convergence at every grid point
  const BaselineFit bf = fit_glmnet_style(d, {0.5, 0.1, 0.01}, 1, 0.0);
  CHECK_FALSE(bf.valid);
  CHECK(all_finite(bf.coef_matrix()));
}

TEST_CASE("predict_baseline closed forms") {
  BaselineFit bf;
  bf.valid = true;
  bf.fits.resize(2);
  bf.fits[0].beta = Vector::Zero(2);
  bf.fits[0].intercept = 0.0;
  bf.fits[1].beta = Vector::Zero(2);
  bf.fits[1].intercept = 0.0;
  RngStream rng(151);
  const Matrix X = random_matrix(4, 2, rng);
  CHECK(max_abs_diff(predict_baseline(bf, X), Matrix::Ones(4, 2)) < 1e-15);

  bf.fits[1].intercept = 0.7;
  const Matrix shifted = predict_baseline(bf, X);
  CHECK(shifted.col(1).isApprox(std::exp(0.7) * Matrix::Ones(4, 1), 1e-12));
}
