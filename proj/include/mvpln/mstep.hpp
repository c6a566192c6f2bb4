#pragma once

#include "mvpln/types.hpp"

#include <vector>

namespace mvpln {

/// Floor on |B| entries inside the quadratic approximation of the l1
/// penalty, and the magnitude below which solved coefficients are truncated
/// to exact zeros for sparsity accounting.
inline constexpr double kEpsB = 1e-6;
inline constexpr double kEpsZero = 1e-4;

/// Stacked latent residuals phi = log theta - B^T x, one row per MC draw per
/// observation, plus the scaled Gram matrix Phi^T Phi / (m n).
struct StackedResiduals {
  Matrix phi;          // (m*n) x q
  Matrix scaled_gram;  // q x q
};

StackedResiduals stack_residuals(const Dataset& data,
                                 const std::vector<LatentBlock>& blocks,
                                 const Matrix& B);

/// Auxiliary matrices of the coefficient update: S = m X^T X (p x p) and
/// H = (sum_j x_j colsum(log Theta_j)^T) Omega0 (p x q).
struct MStepAux {
  Matrix S;
  Matrix H;
};

MStepAux mstep_aux(const Dataset& data, const std::vector<LatentBlock>& blocks,
                   const Matrix& Omega0);

/// Sparse precision estimate:
///   argmin_Omega  tr(scaled_gram Omega) - log|Omega| + lambda2 ||Omega||_1
/// by block coordinate descent over columns with an inner soft-threshold
/// lasso solve (the penalty applies to the diagonal as well). Converged when
/// the working covariance changes by less than 1e-6 over a full sweep.
Matrix graphical_lasso(const Matrix& scaled_gram, double lambda2,
                       int max_sweeps = 500, double tol = 1e-6);

/// Closed-form coefficient update under the local quadratic approximation of
/// the l1 penalty around B_hat: solves
///   [Omega0 (x) S + diag(vec(lambda1 m n / max(|B_hat|, kEpsB)))] vec(B) = vec(H)
/// and reshapes. For lambda1 > 0, entries below kEpsZero are truncated to
/// exact zeros in the returned matrix; raw_out (if given) receives the
/// untruncated solution. Systems with p*q above kCgThreshold are solved by
/// conjugate gradients on the Kronecker-structured operator instead of a
/// dense factorization.
inline constexpr Index kCgThreshold = 5000;
Matrix b_update(const Dataset& data, const std::vector<LatentBlock>& blocks,
                const Matrix& Omega0, const Matrix& B_hat, double lambda1,
                Matrix* raw_out = nullptr);

/// Exact penalized M-step objective (true l1 norms, no approximation):
///   (1/(m n)) tr(Phi^T Phi Omega) - log|Omega|
///   + lambda1 ||B||_1 + lambda2 ||Omega||_1.
double mstep_objective(const Dataset& data,
                       const std::vector<LatentBlock>& blocks, const Matrix& B,
                       const Matrix& Omega, double lambda1, double lambda2);

struct MStepResult {
  ModelFit fit;
  bool converged = false;
  int sweeps = 0;
};

/// Alternates graphical_lasso and b_update from the given starting point
/// until the largest parameter change over one alternation drops below
/// cfg.mstep_tol or cfg.mstep_max_iter sweeps elapse. Non-convergence is a
/// reported status, not an error.
MStepResult m_step(const Dataset& data, const std::vector<LatentBlock>& blocks,
                   const ModelFit& init, double lambda1, double lambda2,
                   const FitConfig& cfg);

}  // namespace mvpln
