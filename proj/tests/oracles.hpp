#pragma once

// Test-only oracles. Everything here is written from first principles and
// stays independent of the library code paths it is used to check.

#include "mvpln/types.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace oracles {

using mvpln::Index;
using mvpln::Matrix;
using mvpln::Vector;

/// Central finite differences of a scalar function, step rel_step * |x_i|.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f,
                          const Vector& x, double rel_step) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::abs(x[i]);
    Vector hi = x, lo = x;
    hi[i] += h;
    lo[i] -= h;
    g[i] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

/// Central finite differences of a vector function (Jacobian, row r = df_r).
inline Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f,
                          const Vector& x, double rel_step) {
  const Index n = x.size();
  Matrix J(f(x).size(), n);
  for (Index i = 0; i < n; ++i) {
    const double h = rel_step * std::abs(x[i]);
    Vector hi = x, lo = x;
    hi[i] += h;
    lo[i] -= h;
    J.col(i) = (f(hi) - f(lo)) / (2.0 * h);
  }
  return J;
}

/// Composite Simpson rule on [a, b] with n panels (n rounded up to even).
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

/// Unnormalized 1-D latent posterior density of the count model, written out
/// directly: theta^y e^{-theta} / y! times the log-normal density with
/// location mu and variance sigma2.
inline double posterior_density_1d(double theta, double y, double mu,
                                   double sigma2) {
  if (theta <= 0.0) return 0.0;
  const double log_pois =
      y * std::log(theta) - theta - std::lgamma(y + 1.0);
  const double z = std::log(theta) - mu;
  const double log_ln = -0.5 * std::log(2.0 * M_PI * sigma2) -
                        0.5 * z * z / sigma2 - std::log(theta);
  return std::exp(log_pois + log_ln);
}

struct PosteriorQuadrature {
  double mass = 0.0;
  double mean_log = 0.0;
  double var_log = 0.0;
  std::vector<double> bin_mass;  // normalized mass per histogram bin
  double lo = 0.0, hi = 0.0;     // histogram support
};

/// Quadrature summary of the 1-D posterior over (0, upper], with bin masses
/// for a `bins`-bin histogram on [lo, hi].
inline PosteriorQuadrature posterior_quadrature_1d(double y, double mu,
                                                   double sigma2, double upper,
                                                   int bins, double lo,
                                                   double hi) {
  const auto f = [&](double t) { return posterior_density_1d(t, y, mu, sigma2); };
  const double eps = 1e-12;
  const int panels = 400000;
  PosteriorQuadrature out;
  out.mass = simpson(f, eps, upper, panels);
  out.mean_log = simpson([&](double t) { return std::log(t) * f(t); }, eps,
                         upper, panels) /
                 out.mass;
  const double m2 = simpson(
                        [&](double t) {
                          const double d = std::log(t) - out.mean_log;
                          return d * d * f(t);
                        },
                        eps, upper, panels) /
                    out.mass;
  out.var_log = m2;
  out.lo = lo;
  out.hi = hi;
  out.bin_mass.resize(size_t(bins));
  const double w = (hi - lo) / bins;
  for (int b = 0; b < bins; ++b) {
    const double a0 = std::max(lo + b * w, eps);
    const double b0 = lo + (b + 1) * w;
    out.bin_mass[size_t(b)] = simpson(f, a0, b0, 2000) / out.mass;
  }
  // fold tail mass into the edge bins so the reference sums to one
  out.bin_mass.front() += simpson(f, eps, std::max(lo, eps), 4000) / out.mass;
  out.bin_mass.back() += simpson(f, hi, upper, 20000) / out.mass;
  return out;
}

/// Objective of the penalized precision problem.
inline double glasso_objective(const Matrix& S, const Matrix& Omega,
                               double lambda2) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(Omega, Eigen::EigenvaluesOnly);
  double logdet = 0.0;
  for (Index i = 0; i < Omega.rows(); ++i)
    logdet += std::log(es.eigenvalues()[i]);
  return S.cwiseProduct(Omega).sum() - logdet +
         lambda2 * Omega.cwiseAbs().sum();
}

/// Projected subgradient descent on the penalized precision objective:
/// diminishing steps, projection onto the PD cone by eigenvalue clamping,
/// best iterate kept. Slow but entirely independent of the solver under
/// test.
inline Matrix glasso_subgradient_solve(const Matrix& S, double lambda2,
                                       int iters = 200000) {
  const Index q = S.rows();
  Matrix Omega = Matrix::Identity(q, q);
  Matrix best = Omega;
  double best_obj = glasso_objective(S, Omega, lambda2);
  const double scale = 1.0 / std::max(1.0, S.cwiseAbs().maxCoeff());
  for (int k = 0; k < iters; ++k) {
    Eigen::LLT<Matrix> llt(Omega);
    const Matrix inv = llt.solve(Matrix::Identity(q, q));
    Matrix G = S - inv;
    for (Index j = 0; j < q; ++j)
      for (Index i = 0; i < q; ++i)
        G(i, j) += lambda2 * (Omega(i, j) > 0 ? 1.0 : (Omega(i, j) < 0 ? -1.0 : 0.0));
    const double step = scale / std::sqrt(double(k + 1));
    Matrix next = Omega - step * G;
    next = 0.5 * (next + next.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(next);
    Vector ev = es.eigenvalues().cwiseMax(1e-6);
    Omega = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    const double obj = glasso_objective(S, Omega, lambda2);
    if (obj < best_obj) {
      best_obj = obj;
      best = Omega;
    }
  }
  return best;
}

/// Damped Newton on the exact unpenalized Poisson regression objective
/// (1/n) sum [exp(eta) - y eta], eta = b0 + x'b. Returns (b0, b).
inline std::pair<double, Vector> newton_poisson(const Matrix& X,
                                                const Vector& y,
                                                int iters = 200) {
  const Index n = y.size();
  const Index p = X.cols();
  Matrix D(n, p + 1);
  D.col(0).setOnes();
  if (p > 0) D.rightCols(p) = X;
  Vector beta = Vector::Zero(p + 1);
  beta[0] = std::log(std::max(y.mean(), 1e-10));
  const auto obj = [&](const Vector& b) {
    const Vector eta = D * b;
    if (eta.maxCoeff() > 700.0) return std::numeric_limits<double>::infinity();
    return (eta.array().exp() - y.array() * eta.array()).mean();
  };
  double cur = obj(beta);
  for (int it = 0; it < iters; ++it) {
    const Vector eta = D * beta;
    const Vector mu = eta.array().exp().matrix();
    const Vector grad = D.transpose() * (mu - y) / double(n);
    const Matrix hess =
        D.transpose() * mu.asDiagonal() * D / double(n) +
        1e-12 * Matrix::Identity(p + 1, p + 1);
    const Vector dir = hess.llt().solve(grad);
    double step = 1.0;
    Vector cand = beta - step * dir;
    while (obj(cand) > cur - 1e-14 && step > 1e-12) {
      step *= 0.5;
      cand = beta - step * dir;
    }
    const double next = obj(cand);
    if (!(next < cur - 1e-14) && grad.cwiseAbs().maxCoeff() < 1e-10) break;
    beta = cand;
    cur = next;
    if (grad.cwiseAbs().maxCoeff() < 1e-12) break;
  }
  Vector slopes = p > 0 ? Vector(beta.tail(p)) : Vector();
  return {beta[0], slopes};
}

/// Exhaustive minimum inertia over all 2-partitions of the columns of X.
inline double best_two_partition_inertia(const Matrix& X) {
  const Index P = X.cols();
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask + 1 < (1u << P); ++mask) {
    Vector c0 = Vector::Zero(X.rows()), c1 = Vector::Zero(X.rows());
    int n0 = 0, n1 = 0;
    for (Index j = 0; j < P; ++j) {
      if (mask & (1u << j)) {
        c1 += X.col(j);
        ++n1;
      } else {
        c0 += X.col(j);
        ++n0;
      }
    }
    c0 /= double(n0);
    c1 /= double(n1);
    double inertia = 0.0;
    for (Index j = 0; j < P; ++j)
      inertia += (X.col(j) - ((mask & (1u << j)) ? c1 : c0)).squaredNorm();
    best = std::min(best, inertia);
  }
  return best;
}

/// Ordinary least squares of each column of Ylog on X.
inline Matrix ols(const Matrix& X, const Matrix& Ylog) {
  return (X.transpose() * X).llt().solve(X.transpose() * Ylog);
}

}  // namespace oracles
