#include "mvpln/model.hpp"

#include "oracles.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace mvpln;
using testutil::random_counts;
using testutil::random_fit;
using testutil::random_positive;

namespace {

ModelFit scalar_fit(double b, double omega) {
  ModelFit fit;
  fit.B = Matrix::Constant(1, 1, b);
  fit.Omega = Matrix::Constant(1, 1, omega);
  return fit;
}

}  // namespace

TEST_CASE("poisson_log_pmf matches closed forms") {
  CHECK(poisson_log_pmf(Vector::Zero(1), Vector::Ones(1)) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(poisson_log_pmf(Vector::Zero(2), Vector::Ones(2)) == doctest::Approx(-2.0).epsilon(1e-12));
  const double expected = 3.0 * std::log(2.0) - 2.0 - std::log(6.0);
  CHECK(poisson_log_pmf(Vector::Constant(1, 3.0), Vector::Constant(1, 2.0)) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("poisson_log_pmf rejects bad input") {
  CHECK_THROWS_AS(poisson_log_pmf(Vector::Zero(1), Vector::Zero(1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(poisson_log_pmf(Vector::Zero(2), Vector::Ones(1)),
                  std::invalid_argument);
}

TEST_CASE("poisson_log_pmf exponentiates to a distribution") {
  for (double theta : {0.5, 5.0, 20.0}) {
    double total = 0.0;
    for (int y = 0; y <= 200; ++y)
      total += std::exp(
          poisson_log_pmf(Vector::Constant(1, double(y)), Vector::Constant(1, theta)));
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("lognormal_log_density closed forms") {
  const ModelFit fit = scalar_fit(0.0, 1.0);
  const Vector x = Vector::Zero(1);
  CHECK(lognormal_log_density(Vector::Ones(1), x, fit) ==
        doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-12));
  CHECK(lognormal_log_density(Vector::Constant(1, std::exp(1.0)), x, fit) ==
        doctest::Approx(-0.5 * std::log(2.0 * M_PI) - 1.5).epsilon(1e-12));
}

TEST_CASE("lognormal_log_density at the latent mean") {
  RngStream rng(11);
  const Index q = 3, p = 2;
  const ModelFit fit = random_fit(p, q, rng);
  const Vector x = rng.normal_vector(p);
  const Vector theta = (fit.B.transpose() * x).array().exp();
  Eigen::SelfAdjointEigenSolver<Matrix> es(fit.Omega, Eigen::EigenvaluesOnly);
  const double logdet = es.eigenvalues().array().log().sum();
  const double expected = -0.5 * q * std::log(2.0 * M_PI) + 0.5 * logdet -
                          theta.array().log().sum();
  CHECK(lognormal_log_density(theta, x, fit) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("lognormal_log_density rejects non-PD Omega") {
  ModelFit fit;
  fit.B = Matrix::Zero(1, 2);
  fit.Omega = Matrix::Constant(2, 2, 1.0);  // rank one
  CHECK_THROWS_AS(lognormal_log_density(Vector::Ones(2), Vector::Zero(1), fit),
                  numerical_error);
}

TEST_CASE("lognormal_log_density integrates to one in 1-D") {
  const ModelFit fit = scalar_fit(0.3, 1.0 / 0.8);  // mean 0.3, variance 0.8
  const Vector x = Vector::Ones(1);
  const auto pdf = [&](double t) {
    return std::exp(lognormal_log_density(Vector::Constant(1, t), x, fit));
  };
  const double mass = oracles::simpson(pdf, 1e-9, 60.0, 300000);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("joint_log_density is the sum of its parts and finite at zero counts") {
  RngStream rng(7);
  const Index q = 4, p = 3;
  const ModelFit fit = random_fit(p, q, rng);
  const Vector x = rng.normal_vector(p);
  const Vector theta = random_positive(q, rng);
  const Vector y = random_counts(q, rng);
  CHECK(joint_log_density(y, theta, x, fit) ==
        doctest::Approx(poisson_log_pmf(y, theta) +
                        lognormal_log_density(theta, x, fit))
            .epsilon(1e-14));
  CHECK(std::isfinite(joint_log_density(Vector::Zero(q), theta, x, fit)));

  // worked scalar value: y=2, B=0, Sigma=1, theta=1
  const double expected = -1.0 - std::log(2.0) - 0.5 * std::log(2.0 * M_PI);
  CHECK(joint_log_density(Vector::Constant(1, 2.0), Vector::Ones(1),
                          Vector::Zero(1), scalar_fit(0.0, 1.0)) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("log densities are pure functions") {
  RngStream rng(23);
  const ModelFit fit = random_fit(3, 2, rng);
  const Vector x = rng.normal_vector(3);
  const Vector theta = random_positive(2, rng);
  const Vector y = random_counts(2, rng);
  const double a = joint_log_density(y, theta, x, fit);
  const double b = joint_log_density(y, theta, x, fit);
  CHECK(a == b);
}

TEST_CASE("joint_grad matches finite differences at random points") {
  RngStream rng(101);
  const Index q = 5, p = 4;
  for (int rep = 0; rep < 20; ++rep) {
    const ModelFit fit = random_fit(p, q, rng);
    const Vector x = rng.normal_vector(p);
    const Vector y = random_counts(q, rng);
    const Vector theta = random_positive(q, rng);
    const auto f = [&](const Vector& t) {
      return joint_log_density(y, t, x, fit);
    };
    const Vector fd = oracles::fd_gradient(f, theta, 1e-6);
    const Vector an = joint_grad(theta, y, x, fit);
    const double rel =
        (fd - an).cwiseAbs().maxCoeff() / std::max(1.0, an.cwiseAbs().maxCoeff());
    CHECK(rel < 1e-5);
  }
}

TEST_CASE("joint_grad scalar cases") {
  const ModelFit fit = scalar_fit(0.0, 1.0);
  const Vector x = Vector::Zero(1);
  CHECK(joint_grad(Vector::Ones(1), Vector::Ones(1), x, fit)(0) ==
        doctest::Approx(-1.0).epsilon(1e-12));
  // Poisson score (y-1)/theta - 1 vanishes at theta = y-1 = 1, and the
  // Gaussian term vanishes there too because log(1) equals the zero mean
  CHECK(joint_grad(Vector::Ones(1), Vector::Constant(1, 2.0), x, fit)(0) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(joint_grad(Vector::Zero(1), Vector::Ones(1), x, fit),
                  std::invalid_argument);
}

TEST_CASE("joint_hessian matches finite differences of joint_grad") {
  RngStream rng(202);
  const Index q = 5, p = 4;
  for (int rep = 0; rep < 20; ++rep) {
    const ModelFit fit = random_fit(p, q, rng);
    const Vector x = rng.normal_vector(p);
    const Vector y = random_counts(q, rng);
    const Vector theta = random_positive(q, rng);
    const auto g = [&](const Vector& t) { return joint_grad(t, y, x, fit); };
    const Matrix fd = oracles::fd_jacobian(g, theta, 1e-6);
    const Matrix an = joint_hessian(theta, y, x, fit);
    const double rel = (fd - an).cwiseAbs().maxCoeff() /
                       std::max(1.0, an.cwiseAbs().maxCoeff());
    CHECK(rel < 1e-4);
  }
}

TEST_CASE("joint_hessian scalar value and exact symmetry") {
  // curvature of the scalar kernel -theta - (log theta)^2 / 2 at theta = 1
  const ModelFit fit = scalar_fit(0.0, 1.0);
  CHECK(joint_hessian(Vector::Ones(1), Vector::Ones(1), Vector::Zero(1), fit)(0, 0) ==
        doctest::Approx(-1.0).epsilon(1e-12));

  RngStream rng(303);
  for (int rep = 0; rep < 3; ++rep) {
    const ModelFit f3 = random_fit(2, 3, rng);
    const Vector x = rng.normal_vector(2);
    const Matrix H = joint_hessian(random_positive(3, rng), random_counts(3, rng), x, f3);
    CHECK((H - H.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}
