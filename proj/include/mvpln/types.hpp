#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvpln {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// A matrix that must be positive definite is not, or a linear system is
/// singular where the math requires it to be solvable.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An iterative solver exhausted its iteration budget.
struct convergence_error : std::runtime_error {
  double residual;
  convergence_error(const std::string& msg, double res)
      : std::runtime_error(msg), residual(res) {}
};

/// A configuration value (file or programmatic) is unusable.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input file; carries 1-based line and field position.
struct parse_error : std::runtime_error {
  int line;
  int column;
  parse_error(const std::string& msg, int line_, int column_)
      : std::runtime_error(msg), line(line_), column(column_) {}
};

/// Predictors X (n x p) paired with count responses Y (n x q).
/// Y is stored as doubles but every entry must be a nonnegative integer.
struct Dataset {
  Matrix X;
  Matrix Y;

  Index n() const { return X.rows(); }
  Index p() const { return X.cols(); }
  Index q() const { return Y.cols(); }

  void validate() const;
};

/// Fitted model parameters: coefficients B (p x q) and precision Omega
/// (q x q, symmetric positive definite), with the penalties that produced
/// them.
struct ModelFit {
  Matrix B;
  Matrix Omega;
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  Index p() const { return B.rows(); }
  Index q() const { return Omega.rows(); }

  /// Covariance Sigma = Omega^{-1}.
  Matrix sigma() const;

  void validate() const;
};

/// Monte Carlo draws of one observation's latent rate vector, one draw per
/// row; every entry strictly positive.
struct LatentBlock {
  Matrix theta;  // m x q
};

/// All hyperparameters of the MCEM fit.
struct FitConfig {
  std::vector<double> lambda1_grid{0.3, 0.08, 0.02};
  std::vector<double> lambda2_grid{0.4, 0.1, 0.02};
  double gamma = 0.5;      // EBIC weight
  int m = 200;             // MC samples per observation
  double tau = 1.2;        // proposal covariance scale
  int burn_in = 200;
  int thinning = 1;
  int em_max_iter = 100;
  double em_tol = 1e-3;
  int mstep_max_iter = 50;
  double mstep_tol = 1e-4;
  std::uint64_t seed = 0;

  void validate() const;
};

/// True if every entry of M is finite.
bool all_finite(const Matrix& M);

/// Max absolute entry of A - B.
double max_abs_diff(const Matrix& A, const Matrix& B);

/// Number of entries with |value| >= eps (the model's notion of "nonzero"
/// after truncation).
long count_nonzero(const Matrix& M, double eps);

}  // namespace mvpln
