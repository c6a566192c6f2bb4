#include "mvpln/kmeans.hpp"

#include "mvpln/rng.hpp"

#include <cmath>
#include <iostream>
#include <limits>

namespace mvpln {

namespace {

constexpr std::uint64_t kRestartTag = 0x4B4D454E53ULL;

struct LloydRun {
  std::vector<int> assignment;
  Matrix centroids;
  double inertia = std::numeric_limits<double>::infinity();
};

double sq_dist(const Matrix& X, Index col, const Matrix& C, Index centroid) {
  return (X.col(col) - C.col(centroid)).squaredNorm();
}

LloydRun lloyd_once(const Matrix& X, int k, int max_iter, RngStream& rng) {
  const Index P = X.cols();
  LloydRun run;
  run.centroids.resize(X.rows(), k);

  // k-means++ seeding
  std::vector<double> d2(size_t(P), std::numeric_limits<double>::infinity());
  Index first = Index(rng.below(std::uint64_t(P)));
  run.centroids.col(0) = X.col(first);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Index j = 0; j < P; ++j) {
      d2[size_t(j)] = std::min(d2[size_t(j)], sq_dist(X, j, run.centroids, c - 1));
      total += d2[size_t(j)];
    }
    Index pick;
    if (total <= 0.0) {
      pick = Index(rng.below(std::uint64_t(P)));
    } else {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = P - 1;
      for (Index j = 0; j < P; ++j) {
        acc += d2[size_t(j)];
        if (acc >= target) {
          pick = j;
          break;
        }
      }
    }
    run.centroids.col(c) = X.col(pick);
  }

  run.assignment.assign(size_t(P), 0);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool moved = false;
    for (Index j = 0; j < P; ++j) {
      int best = 0;
      double best_d = sq_dist(X, j, run.centroids, 0);
      for (int c = 1; c < k; ++c) {
        const double d = sq_dist(X, j, run.centroids, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (run.assignment[size_t(j)] != best) {
        run.assignment[size_t(j)] = best;
        moved = true;
      }
    }

    Matrix sums = Matrix::Zero(X.rows(), k);
    std::vector<int> counts(size_t(k), 0);
    for (Index j = 0; j < P; ++j) {
      sums.col(run.assignment[size_t(j)]) += X.col(j);
      ++counts[size_t(run.assignment[size_t(j)])];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[size_t(c)] > 0) {
        run.centroids.col(c) = sums.col(c) / double(counts[size_t(c)]);
      } else {
        // empty cluster: seize the point farthest from its centroid
        Index worst = 0;
        double worst_d = -1.0;
        for (Index j = 0; j < P; ++j) {
          const double d =
              sq_dist(X, j, run.centroids, run.assignment[size_t(j)]);
          if (d > worst_d && counts[size_t(run.assignment[size_t(j)])] > 1) {
            worst_d = d;
            worst = j;
          }
        }
        --counts[size_t(run.assignment[size_t(worst)])];
        run.assignment[size_t(worst)] = c;
        counts[size_t(c)] = 1;
        run.centroids.col(c) = X.col(worst);
        moved = true;
      }
    }
    if (!moved && iter > 0) break;
  }

  run.inertia = 0.0;
  for (Index j = 0; j < P; ++j)
    run.inertia += sq_dist(X, j, run.centroids, run.assignment[size_t(j)]);
  return run;
}

}  // namespace

ColumnClustering kmeans_columns(const Matrix& X_raw, int k, int max_iter,
                                int n_init, std::uint64_t seed) {
  const Index P = X_raw.cols();
  if (k < 1 || k > P)
    throw std::invalid_argument("kmeans_columns: k must be in [1, #columns]");
  if (n_init < 1) throw std::invalid_argument("kmeans_columns: n_init < 1");

  LloydRun best;
  for (int restart = 0; restart < n_init; ++restart) {
    RngStream rng(derive_seed(seed, kRestartTag, std::uint64_t(restart)));
    LloydRun run = lloyd_once(X_raw, k, max_iter, rng);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  ColumnClustering out;
  out.assignment = std::move(best.assignment);
  out.centroids = std::move(best.centroids);
  out.inertia = best.inertia;
  return out;
}

Matrix aggregate_and_standardize(const Matrix& X_raw,
                                 const ColumnClustering& clustering,
                                 bool standardize,
                                 std::vector<int>* constant_out) {
  const Index P = X_raw.cols();
  const Index n = X_raw.rows();
  if (Index(clustering.assignment.size()) != P)
    throw std::invalid_argument("aggregate_and_standardize: assignment size");
  const Index k = clustering.centroids.cols();
  Matrix out = Matrix::Zero(n, k);
  for (Index j = 0; j < P; ++j) {
    const int c = clustering.assignment[size_t(j)];
    if (c < 0 || c >= k)
      throw std::invalid_argument("aggregate_and_standardize: bad cluster id");
    out.col(c) += X_raw.col(j);
  }
  if (!standardize) return out;
  for (Index c = 0; c < k; ++c) {
    const double mean = out.col(c).mean();
    out.col(c).array() -= mean;
    const double sd =
        n > 1 ? std::sqrt(out.col(c).squaredNorm() / double(n - 1)) : 0.0;
    if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
      out.col(c).setZero();
      if (constant_out) constant_out->push_back(int(c));
      std::cerr << "warning: aggregated column " << c
                << " is constant; standardized to all zeros\n";
    } else {
      out.col(c) /= sd;
    }
  }
  return out;
}

}  // namespace mvpln
