#pragma once

#include "mvpln/types.hpp"

namespace mvpln {

// Density kernels of the Poisson log-normal model. Counts y are
// conditionally independent Poisson given the latent rate vector theta,
// and log theta is multivariate normal with mean B^T x and precision
// Omega. Everything is computed and exposed in log space.

/// log p(y | theta) = sum_i [ y_i log theta_i - theta_i - lgamma(y_i + 1) ].
double poisson_log_pmf(const Vector& y, const Vector& theta);

/// Log density of theta | x under the log-normal latent layer:
///   -(q/2) log 2pi + (1/2) log|Omega|
///   - (1/2) (log theta - B^T x)^T Omega (log theta - B^T x)
///   - sum_i log theta_i
/// log|Omega| comes from a Cholesky factorization; a failed factorization
/// reports Omega as not positive definite.
double lognormal_log_density(const Vector& theta, const Vector& x,
                             const ModelFit& fit);

/// log p(y, theta | x) = poisson_log_pmf + lognormal_log_density.
double joint_log_density(const Vector& y, const Vector& theta, const Vector& x,
                         const ModelFit& fit);

/// Gradient of joint_log_density in theta:
///   diag(1/theta) [ (y - 1) - Omega (log theta - B^T x) ] - 1.
Vector joint_grad(const Vector& theta, const Vector& y, const Vector& x,
                  const ModelFit& fit);

/// Hessian of joint_log_density in theta (symmetric):
///   H_ik = delta_ik [ -(y_i - 1) + (Omega (log theta - B^T x))_i ] / theta_i^2
///          - Omega_ik / (theta_i theta_k).
Matrix joint_hessian(const Vector& theta, const Vector& y, const Vector& x,
                     const ModelFit& fit);

}  // namespace mvpln
