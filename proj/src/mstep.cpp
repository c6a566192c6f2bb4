#include "mvpln/mstep.hpp"

#include <cmath>

namespace mvpln {

namespace {

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

int block_rows(const std::vector<LatentBlock>& blocks) {
  if (blocks.empty()) throw std::invalid_argument("no latent blocks");
  const Index m = blocks.front().theta.rows();
  for (const auto& b : blocks)
    if (b.theta.rows() != m)
      throw std::invalid_argument("latent blocks have unequal draw counts");
  return int(m);
}

}  // namespace

StackedResiduals stack_residuals(const Dataset& data,
                                 const std::vector<LatentBlock>& blocks,
                                 const Matrix& B) {
  const Index n = data.n();
  const Index q = data.q();
  if (Index(blocks.size()) != n)
    throw std::invalid_argument("stack_residuals: block count != n");
  const int m = block_rows(blocks);
  StackedResiduals out;
  out.phi.resize(Index(m) * n, q);
  for (Index j = 0; j < n; ++j) {
    const Vector mean = B.transpose() * data.X.row(j).transpose();
    out.phi.middleRows(Index(m) * j, m) =
        blocks[j].theta.array().log().matrix().rowwise() - mean.transpose();
  }
  out.scaled_gram =
      out.phi.transpose() * out.phi / double(out.phi.rows());
  return out;
}

MStepAux mstep_aux(const Dataset& data, const std::vector<LatentBlock>& blocks,
                   const Matrix& Omega0) {
  const Index n = data.n();
  const int m = block_rows(blocks);
  MStepAux aux;
  aux.S = double(m) * data.X.transpose() * data.X;
  Matrix M = Matrix::Zero(data.p(), data.q());
  for (Index j = 0; j < n; ++j) {
      const Vector colsum =
        blocks[j].theta.array().log().matrix().colwise().sum().transpose();
    M += data.X.row(j).transpose() * colsum.transpose();
  }
  aux.H = M * Omega0;
  return aux;
}

Matrix graphical_lasso(const Matrix& gram, double lambda2, int max_sweeps,
                       double tol) {
  const Index q = gram.rows();
  if (gram.cols() != q) throw std::invalid_argument("graphical_lasso: not square");
  if (max_abs_diff(gram, gram.transpose()) > 1e-8)
    throw std::invalid_argument("graphical_lasso: gram not symmetric");
  if (lambda2 < 0.0) throw std::invalid_argument("graphical_lasso: lambda2 < 0");
  if (lambda2 == 0.0) {
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success)
      throw numerical_error("graphical_lasso: singular gram with lambda2 = 0");
  }

  const Matrix S = 0.5 * (gram + gram.transpose());
  Matrix W = S;
  W.diagonal().array() += lambda2;
  Matrix Beta = Matrix::Zero(q, q);  // Beta(i, j): coefficient of i in column j

  const double inner_tol = 1e-10 * std::max(1.0, S.cwiseAbs().maxCoeff());
  bool converged = (q == 1);
  double residual = 0.0;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    const Matrix W_prev = W;
    for (Index j = 0; j < q; ++j) {
      // lasso on the j-th column: 1/2 b' W11 b - b' s12 + lambda2 |b|_1
      for (int pass = 0; pass < 10000; ++pass) {
        double max_delta = 0.0;
        for (Index k = 0; k < q; ++k) {
          if (k == j) continue;
          double r = S(k, j);
          for (Index l = 0; l < q; ++l) {
            if (l == j || l == k) continue;
            r -= W(k, l) * Beta(l, j);
          }
          const double bk = soft_threshold(r, lambda2) / W(k, k);
          max_delta = std::max(max_delta, std::abs(bk - Beta(k, j)));
          Beta(k, j) = bk;
        }
        if (max_delta < inner_tol) break;
      }
      for (Index k = 0; k < q; ++k) {
        if (k == j) continue;
        double w = 0.0;
        for (Index l = 0; l < q; ++l) {
          if (l == j) continue;
          w += W(k, l) * Beta(l, j);
        }
        W(k, j) = w;
        W(j, k) = w;
      }
    }
    residual = max_abs_diff(W, W_prev);
    converged = residual < tol;
  }
  if (!converged)
    throw convergence_error("graphical_lasso: no convergence after " +
                                std::to_string(max_sweeps) + " sweeps",
                            residual);

  Matrix Omega(q, q);
  for (Index j = 0; j < q; ++j) {
    double quad = 0.0;
    for (Index k = 0; k < q; ++k)
      if (k != j) quad += W(k, j) * Beta(k, j);
    const double ojj = 1.0 / (W(j, j) - quad);
    Omega(j, j) = ojj;
    for (Index k = 0; k < q; ++k)
      if (k != j) Omega(k, j) = -Beta(k, j) * ojj;
  }
  Omega = 0.5 * (Omega + Omega.transpose()).eval();
  Eigen::LLT<Matrix> llt(Omega);
  if (llt.info() != Eigen::Success)
    throw numerical_error("graphical_lasso: estimate not positive definite");
  return Omega;
}

namespace {

// Matrix-vector product of the coefficient-update system without forming the
// Kronecker product: v -> vec(S V Omega0) + penalty .* v.
struct KroneckerOperator {
  const Matrix& S;
  const Matrix& Omega0;
  const Matrix& penalty;  // p x q elementwise diagonal

  Matrix apply(const Matrix& V) const {
    return S * V * Omega0 + penalty.cwiseProduct(V);
  }
};

Matrix solve_cg(const KroneckerOperator& op, const Matrix& H) {
  const Index p = H.rows(), q = H.cols();
  Matrix X = Matrix::Zero(p, q);
  Matrix R = H;
  // Jacobi preconditioner from the operator's diagonal
  Matrix D(p, q);
  for (Index j = 0; j < q; ++j)
    for (Index i = 0; i < p; ++i)
      D(i, j) = op.S(i, i) * op.Omega0(j, j) + op.penalty(i, j);
  Matrix Z = R.cwiseQuotient(D);
  Matrix P = Z;
  double rz = R.cwiseProduct(Z).sum();
  const double target = 1e-12 * H.norm();
  for (Index it = 0; it < 20 * p * q; ++it) {
    if (R.norm() <= target) break;
    const Matrix AP = op.apply(P);
    const double alpha = rz / P.cwiseProduct(AP).sum();
    X += alpha * P;
    R -= alpha * AP;
    Z = R.cwiseQuotient(D);
    const double rz_new = R.cwiseProduct(Z).sum();
    P = Z + (rz_new / rz) * P;
    rz = rz_new;
  }
  return X;
}

}  // namespace

Matrix b_update(const Dataset& data, const std::vector<LatentBlock>& blocks,
                const Matrix& Omega0, const Matrix& B_hat, double lambda1,
                Matrix* raw_out) {
  const Index p = data.p();
  const Index q = data.q();
  const Index n = data.n();
  const int m = block_rows(blocks);
  if (B_hat.rows() != p || B_hat.cols() != q)
    throw std::invalid_argument("b_update: B_hat has wrong shape");
  const MStepAux aux = mstep_aux(data, blocks, Omega0);

  const Matrix penalty =
      ((lambda1 * double(m) * double(n)) / B_hat.array().abs().max(kEpsB))
          .matrix();

  Matrix B(p, q);
  if (p * q <= kCgThreshold) {
    Matrix A(p * q, p * q);
    for (Index b = 0; b < q; ++b)
      for (Index a = 0; a < q; ++a)
        A.block(a * p, b * p, p, p) = Omega0(a, b) * aux.S;
    for (Index j = 0; j < q; ++j)
      for (Index i = 0; i < p; ++i) A(j * p + i, j * p + i) += penalty(i, j);
    Eigen::LLT<Matrix> llt(A);
    if (llt.info() != Eigen::Success)
      throw numerical_error("b_update: singular coefficient system");
    const Vector vec_h = Eigen::Map<const Vector>(aux.H.data(), p * q);
    const Vector vec_b = llt.solve(vec_h);
    B = Eigen::Map<const Matrix>(vec_b.data(), p, q);
  } else {
    const KroneckerOperator op{aux.S, Omega0, penalty};
    B = solve_cg(op, aux.H);
  }
  if (!all_finite(B)) throw numerical_error("b_update: non-finite solution");
  if (raw_out) *raw_out = B;
  if (lambda1 > 0.0)
    B = (B.cwiseAbs().array() < kEpsZero).select(Matrix::Zero(p, q), B);
  return B;
}

double mstep_objective(const Dataset& data,
                       const std::vector<LatentBlock>& blocks, const Matrix& B,
                       const Matrix& Omega, double lambda1, double lambda2) {
  const StackedResiduals sr = stack_residuals(data, blocks, B);
  Eigen::LLT<Matrix> llt(Omega);
  if (llt.info() != Eigen::Success)
    throw numerical_error("mstep_objective: Omega not positive definite");
  const Matrix& lfac = llt.matrixLLT();
  double logdet = 0.0;
  for (Index i = 0; i < Omega.rows(); ++i)
    logdet += 2.0 * std::log(lfac(i, i));
  return sr.scaled_gram.cwiseProduct(Omega).sum() - logdet +
         lambda1 * B.cwiseAbs().sum() + lambda2 * Omega.cwiseAbs().sum();
}

MStepResult m_step(const Dataset& data, const std::vector<LatentBlock>& blocks,
                   const ModelFit& init, double lambda1, double lambda2,
                   const FitConfig& cfg) {
  MStepResult out;
  Matrix B = init.B;
  Matrix Omega = init.Omega;
  for (int sweep = 1; sweep <= cfg.mstep_max_iter; ++sweep) {
    out.sweeps = sweep;
    const StackedResiduals sr = stack_residuals(data, blocks, B);
    const Matrix Omega_new = graphical_lasso(sr.scaled_gram, lambda2);
    const Matrix B_new = b_update(data, blocks, Omega_new, B, lambda1);
    const double delta =
        std::max(max_abs_diff(B_new, B), max_abs_diff(Omega_new, Omega));
    B = B_new;
    Omega = Omega_new;
    if (delta < cfg.mstep_tol) {
      out.converged = true;
      break;
    }
  }
  out.fit = ModelFit{B, Omega, lambda1, lambda2};
  return out;
}

}  // namespace mvpln
