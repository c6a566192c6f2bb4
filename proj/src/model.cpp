#include "mvpln/model.hpp"

#include <cmath>

namespace mvpln {

void Dataset::validate() const {
  if (X.rows() < 1) throw std::invalid_argument("Dataset: no observations");
  if (X.rows() != Y.rows())
    throw std::invalid_argument("Dataset: X and Y row counts differ");
  if (!all_finite(X)) throw std::invalid_argument("Dataset: non-finite X entry");
  for (Index j = 0; j < Y.rows(); ++j) {
    for (Index i = 0; i < Y.cols(); ++i) {
      const double v = Y(j, i);
      if (!std::isfinite(v) || v < 0.0 || v != std::floor(v))
        throw std::invalid_argument("Dataset: Y(" + std::to_string(j) + "," +
                                    std::to_string(i) +
                                    ") is not a nonnegative integer");
    }
  }
}

Matrix ModelFit::sigma() const {
  Eigen::LLT<Matrix> llt(Omega);
  if (llt.info() != Eigen::Success)
    throw numerical_error("ModelFit: Omega is not positive definite");
  return llt.solve(Matrix::Identity(Omega.rows(), Omega.cols()));
}

void ModelFit::validate() const {
  if (B.cols() != Omega.rows())
    throw std::invalid_argument("ModelFit: B and Omega dimensions disagree");
  if (!all_finite(B)) throw std::invalid_argument("ModelFit: non-finite B entry");
  if (lambda1 < 0.0 || lambda2 < 0.0)
    throw std::invalid_argument("ModelFit: negative penalty");
  if (max_abs_diff(Omega, Omega.transpose()) > 1e-8)
    throw std::invalid_argument("ModelFit: Omega is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(Omega, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw numerical_error("ModelFit: Omega is not positive definite");
}

void FitConfig::validate() const {
  if (lambda1_grid.empty() || lambda2_grid.empty())
    throw std::invalid_argument("FitConfig: empty penalty grid");
  for (double l : lambda1_grid)
    if (l < 0.0) throw std::invalid_argument("FitConfig: negative lambda1");
  for (double l : lambda2_grid)
    if (l < 0.0) throw std::invalid_argument("FitConfig: negative lambda2");
  if (gamma < 0.0 || gamma > 1.0)
    throw std::invalid_argument("FitConfig: gamma outside [0,1]");
  if (m < 1) throw std::invalid_argument("FitConfig: m < 1");
  if (tau <= 0.0) throw std::invalid_argument("FitConfig: tau <= 0");
  if (burn_in < 0) throw std::invalid_argument("FitConfig: negative burn_in");
  if (thinning < 1) throw std::invalid_argument("FitConfig: thinning < 1");
  if (em_max_iter < 1 || mstep_max_iter < 1)
    throw std::invalid_argument("FitConfig: iteration limits must be >= 1");
  if (em_tol <= 0.0 || mstep_tol <= 0.0)
    throw std::invalid_argument("FitConfig: tolerances must be > 0");
}

bool all_finite(const Matrix& M) { return M.allFinite(); }

double max_abs_diff(const Matrix& A, const Matrix& B) {
  return (A - B).cwiseAbs().maxCoeff();
}

long count_nonzero(const Matrix& M, double eps) {
  long count = 0;
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < M.rows(); ++i)
      if (std::abs(M(i, j)) >= eps) ++count;
  return count;
}

namespace {

void check_theta(const Vector& theta) {
  for (Index i = 0; i < theta.size(); ++i)
    if (!(theta[i] > 0.0))
      throw std::invalid_argument("theta must be strictly positive");
}

}  // namespace

double poisson_log_pmf(const Vector& y, const Vector& theta) {
  if (y.size() != theta.size())
    throw std::invalid_argument("poisson_log_pmf: length mismatch");
  check_theta(theta);
  double acc = 0.0;
  for (Index i = 0; i < y.size(); ++i)
    acc += y[i] * std::log(theta[i]) - theta[i] - std::lgamma(y[i] + 1.0);
  return acc;
}

double lognormal_log_density(const Vector& theta, const Vector& x,
                             const ModelFit& fit) {
  check_theta(theta);
  const Index q = theta.size();
  Eigen::LLT<Matrix> llt(fit.Omega);
  if (llt.info() != Eigen::Success)
    throw numerical_error("lognormal_log_density: Omega not positive definite");
  const Matrix& lfac = llt.matrixLLT();
  double half_logdet = 0.0;
  for (Index i = 0; i < q; ++i) half_logdet += std::log(lfac(i, i));
  const Vector log_theta = theta.array().log();
  const Vector z = log_theta - fit.B.transpose() * x;
  const double quad = z.dot(fit.Omega * z);
  return -0.5 * double(q) * std::log(2.0 * M_PI) + half_logdet - 0.5 * quad -
         log_theta.sum();
}

double joint_log_density(const Vector& y, const Vector& theta, const Vector& x,
                         const ModelFit& fit) {
  return poisson_log_pmf(y, theta) + lognormal_log_density(theta, x, fit);
}

Vector joint_grad(const Vector& theta, const Vector& y, const Vector& x,
                  const ModelFit& fit) {
  check_theta(theta);
  const Vector z = theta.array().log().matrix() - fit.B.transpose() * x;
  const Vector inner = (y.array() - 1.0).matrix() - fit.Omega * z;
  return (inner.array() / theta.array() - 1.0).matrix();
}

Matrix joint_hessian(const Vector& theta, const Vector& y, const Vector& x,
                     const ModelFit& fit) {
  check_theta(theta);
  const Index q = theta.size();
  const Vector z = theta.array().log().matrix() - fit.B.transpose() * x;
  const Vector omega_z = fit.Omega * z;
  const Vector inv_theta = theta.array().inverse();
  Matrix H = -(inv_theta * inv_theta.transpose()).cwiseProduct(fit.Omega);
  for (Index i = 0; i < q; ++i)
    H(i, i) += (-(y[i] - 1.0) + omega_z[i]) / (theta[i] * theta[i]);
  return H;
}

}  // namespace mvpln
