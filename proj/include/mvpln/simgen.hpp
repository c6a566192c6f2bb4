#pragma once

#include "mvpln/rng.hpp"
#include "mvpln/types.hpp"

#include <string>
#include <utility>

namespace mvpln {

enum class OmegaScenario { Random, Banded, Sparse, Diagonal };

OmegaScenario omega_scenario_from_string(const std::string& name);
std::string to_string(OmegaScenario s);

/// Synthetic-data generation parameters. sigma_x and sigma_b are variances
/// (the predictor rows are N(mu_x, sigma_x I), nonzero coefficients are
/// N(mu_b, sigma_b)); psi is the max absolute element the scaled latent
/// covariance is normalized to.
struct SimConfig {
  int n = 50;
  int n_test = 20;
  int p = 30;
  int q = 5;
  double mu_min = -0.5;
  double mu_max = 0.5;
  double sigma_x = 0.5;
  double mu_b = 0.0;
  double sigma_b = 0.4;
  int zeros_per_column = -1;  // < 0 means floor(0.7 p)
  double psi = 1.0;
  OmegaScenario omega_scenario = OmegaScenario::Random;
  int band_width = 2;
  std::uint64_t seed = 0;

  int effective_zeros() const;
  void validate() const;
};

struct SimInstance {
  Dataset train;
  Dataset test;
  Matrix B_true;
  Matrix Omega_true;
  Matrix Sigma_true;
};

/// Draws a positive definite precision matrix for the requested scenario:
/// Random is Psi' Psi with Psi ~ Unif(-1,1) entries, Banded is T' D^{-1} T
/// from a unit-lower-triangular banded T (Unif(-1,1) entries) and diagonal D
/// (Unif(0,1) clamped at 0.05), Sparse is a Banded draw under a random
/// symmetric permutation, Diagonal is Unif(0,1) diagonals clamped at 0.05.
Matrix gen_omega(OmegaScenario scenario, int q, int band_width, RngStream& rng);

/// Rescales so the max absolute element of Sigma = Omega^{-1} equals psi;
/// returns (Omega_scaled, Sigma_scaled), still an exact inverse pair.
std::pair<Matrix, Matrix> scale_sigma(const Matrix& Omega, double psi);

/// Full synthetic instance: truth matrices plus train and test splits drawn
/// from the model. Deterministic in cfg.seed. Throws config_error if any
/// latent rate exceeds 1e8 (the configuration would produce absurd counts).
SimInstance gen_instance(const SimConfig& cfg);

}  // namespace mvpln
