#include "mvpln/simgen.hpp"

#include "mvpln/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace mvpln {

OmegaScenario omega_scenario_from_string(const std::string& name) {
  if (name == "random") return OmegaScenario::Random;
  if (name == "banded") return OmegaScenario::Banded;
  if (name == "sparse") return OmegaScenario::Sparse;
  if (name == "diagonal") return OmegaScenario::Diagonal;
  throw config_error("unknown omega scenario: " + name);
}

std::string to_string(OmegaScenario s) {
  switch (s) {
    case OmegaScenario::Random: return "random";
    case OmegaScenario::Banded: return "banded";
    case OmegaScenario::Sparse: return "sparse";
    case OmegaScenario::Diagonal: return "diagonal";
  }
  return "random";
}

int SimConfig::effective_zeros() const {
  return zeros_per_column < 0 ? int(0.7 * p) : zeros_per_column;
}

void SimConfig::validate() const {
  if (n < 1 || n_test < 0 || p < 1 || q < 1)
    throw config_error("SimConfig: dimensions must be positive");
  if (mu_min > mu_max) throw config_error("SimConfig: mu_min > mu_max");
  if (sigma_x <= 0.0) throw config_error("SimConfig: sigma_x must be > 0");
  if (sigma_b < 0.0) throw config_error("SimConfig: sigma_b must be >= 0");
  if (psi <= 0.0) throw config_error("SimConfig: psi must be > 0");
  if (effective_zeros() > p)
    throw config_error("SimConfig: zeros_per_column > p");
  if (band_width < 1) throw config_error("SimConfig: band_width must be >= 1");
}

namespace {

constexpr double kDiagFloor = 0.05;
constexpr double kThetaCap = 1e8;

Matrix banded_omega(int q, int band_width, RngStream& rng) {
  Matrix T = Matrix::Identity(q, q);
  for (Index i = 0; i < q; ++i)
    for (Index j = std::max(Index(0), i - band_width); j < i; ++j)
      T(i, j) = rng.uniform(-1.0, 1.0);
  Vector d(q);
  for (Index i = 0; i < q; ++i)
    d[i] = std::max(rng.uniform(), kDiagFloor);
  return T.transpose() * d.cwiseInverse().asDiagonal() * T;
}

std::vector<Index> random_permutation(Index q, RngStream& rng) {
  std::vector<Index> perm(static_cast<size_t>(q), Index(0));
  std::iota(perm.begin(), perm.end(), Index(0));
  for (Index i = q - 1; i > 0; --i)
    std::swap(perm[size_t(i)], perm[size_t(rng.below(std::uint64_t(i + 1)))]);
  return perm;
}

}  // namespace

Matrix gen_omega(OmegaScenario scenario, int q, int band_width,
                 RngStream& rng) {
  if (q < 1) throw std::invalid_argument("gen_omega: q < 1");
  switch (scenario) {
    case OmegaScenario::Random: {
      Matrix psi_mat(q, q);
      for (Index i = 0; i < q; ++i)
        for (Index j = 0; j < q; ++j) psi_mat(i, j) = rng.uniform(-1.0, 1.0);
      Matrix omega = psi_mat.transpose() * psi_mat;
      Eigen::SelfAdjointEigenSolver<Matrix> es(omega, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < kEpsPsd)
        omega.diagonal().array() += kEpsPsd;
      return omega;
    }
    case OmegaScenario::Banded:
      return banded_omega(q, band_width, rng);
    case OmegaScenario::Sparse: {
      const Matrix base = banded_omega(q, band_width, rng);
      const auto perm = random_permutation(q, rng);
      Matrix omega(q, q);
      for (Index i = 0; i < q; ++i)
        for (Index j = 0; j < q; ++j)
          omega(i, j) = base(perm[size_t(i)], perm[size_t(j)]);
      return omega;
    }
    case OmegaScenario::Diagonal: {
      Vector d(q);
      for (Index i = 0; i < q; ++i)
        d[i] = std::max(rng.uniform(), kDiagFloor);
      return d.asDiagonal();
    }
  }
  throw std::invalid_argument("gen_omega: unknown scenario");
}

std::pair<Matrix, Matrix> scale_sigma(const Matrix& Omega, double psi) {
  Eigen::LLT<Matrix> llt(Omega);
  if (llt.info() != Eigen::Success)
    throw numerical_error("scale_sigma: Omega not positive definite");
  const Matrix sigma =
      llt.solve(Matrix::Identity(Omega.rows(), Omega.cols()));
  const double c = psi / sigma.cwiseAbs().maxCoeff();
  return {Omega / c, c * sigma};
}

SimInstance gen_instance(const SimConfig& cfg) {
  cfg.validate();
  RngStream rng(cfg.seed);
  SimInstance inst;

  const Matrix omega_raw =
      gen_omega(cfg.omega_scenario, cfg.q, cfg.band_width, rng);
  auto [omega, sigma] = scale_sigma(omega_raw, cfg.psi);
  inst.Omega_true = std::move(omega);
  inst.Sigma_true = std::move(sigma);

  Vector mu_x(cfg.p);
  for (Index k = 0; k < cfg.p; ++k) mu_x[k] = rng.uniform(cfg.mu_min, cfg.mu_max);

  const int zeros = cfg.effective_zeros();
  const double sd_b = std::sqrt(cfg.sigma_b);
  inst.B_true.resize(cfg.p, cfg.q);
  std::vector<Index> idx(static_cast<size_t>(cfg.p), Index(0));
  for (Index i = 0; i < cfg.q; ++i) {
    std::iota(idx.begin(), idx.end(), Index(0));
    // partial Fisher-Yates: the first `zeros` slots become the zero positions
    for (int z = 0; z < zeros; ++z) {
      const auto pick = z + Index(rng.below(std::uint64_t(cfg.p - z)));
      std::swap(idx[size_t(z)], idx[size_t(pick)]);
    }
    Vector col(cfg.p);
    for (Index k = 0; k < cfg.p; ++k) col[k] = cfg.mu_b + sd_b * rng.normal();
    for (int z = 0; z < zeros; ++z) col[idx[size_t(z)]] = 0.0;
    inst.B_true.col(i) = col;
  }

  Eigen::LLT<Matrix> sig_llt(inst.Sigma_true);
  if (sig_llt.info() != Eigen::Success)
    throw numerical_error("gen_instance: scaled Sigma not positive definite");
  const Matrix L = sig_llt.matrixL();
  const double sd_x = std::sqrt(cfg.sigma_x);

  const auto draw_split = [&](int rows) {
    Dataset d;
    d.X.resize(rows, cfg.p);
    d.Y.resize(rows, cfg.q);
    for (Index j = 0; j < rows; ++j) {
      for (Index k = 0; k < cfg.p; ++k)
        d.X(j, k) = mu_x[k] + sd_x * rng.normal();
      const Vector eps = L * rng.normal_vector(cfg.q);
      const Vector log_theta =
          inst.B_true.transpose() * d.X.row(j).transpose() + eps;
      for (Index i = 0; i < cfg.q; ++i) {
        const double theta = std::exp(log_theta[i]);
        if (!(theta <= kThetaCap))
          throw config_error(
              "gen_instance: latent rate exceeded 1e8; lower psi, sigma_b or "
              "mu_b");
        d.Y(j, i) = double(rng.poisson(theta));
      }
    }
    return d;
  };

  inst.train = draw_split(cfg.n);
  inst.test = draw_split(cfg.n_test);
  return inst;
}

}  // namespace mvpln
