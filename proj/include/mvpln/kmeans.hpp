#pragma once

#include "mvpln/types.hpp"

#include <cstdint>
#include <vector>

namespace mvpln {

/// Clustering of a matrix's columns (each column treated as one point of
/// dimension n).
struct ColumnClustering {
  std::vector<int> assignment;  // column index -> cluster id in [0, k)
  Matrix centroids;             // n x k
  double inertia = 0.0;
};

/// Lloyd's algorithm over the columns of X_raw with k-means++ seeding and
/// n_init restarts (best inertia kept). Deterministic given the seed.
ColumnClustering kmeans_columns(const Matrix& X_raw, int k, int max_iter = 100,
                                int n_init = 10, std::uint64_t seed = 0);

/// Sums the member columns of every cluster (output column order = cluster
/// id), then optionally rescales each aggregated column to mean 0 and sample
/// standard deviation 1 (n-1 denominator). Constant columns standardize to
/// all zeros; their cluster ids are reported in constant_out when given.
Matrix aggregate_and_standardize(const Matrix& X_raw,
                                 const ColumnClustering& clustering,
                                 bool standardize,
                                 std::vector<int>* constant_out = nullptr);

}  // namespace mvpln
