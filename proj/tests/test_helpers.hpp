#pragma once

#include "mvpln/rng.hpp"
#include "mvpln/types.hpp"

namespace testutil {

using mvpln::Index;
using mvpln::Matrix;
using mvpln::ModelFit;
using mvpln::RngStream;
using mvpln::Vector;

inline Matrix random_matrix(Index rows, Index cols, RngStream& rng,
                            double lo = -1.0, double hi = 1.0) {
  Matrix M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = rng.uniform(lo, hi);
  return M;
}

inline Matrix random_spd(Index q, RngStream& rng, double ridge = 0.5) {
  const Matrix A = random_matrix(q, q, rng);
  return A.transpose() * A + ridge * Matrix::Identity(q, q);
}

inline ModelFit random_fit(Index p, Index q, RngStream& rng) {
  ModelFit fit;
  fit.B = random_matrix(p, q, rng, -0.5, 0.5);
  fit.Omega = random_spd(q, rng);
  return fit;
}

inline Vector random_counts(Index q, RngStream& rng, long max_count = 8) {
  Vector y(q);
  for (Index i = 0; i < q; ++i)
    y[i] = double(rng.below(std::uint64_t(max_count + 1)));
  return y;
}

inline Vector random_positive(Index q, RngStream& rng, double lo = 0.2,
                              double hi = 3.0) {
  Vector t(q);
  for (Index i = 0; i < q; ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

}  // namespace testutil
