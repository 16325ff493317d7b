#pragma once

#include "ordtensor/tensor.hpp"

#include <cstdint>
#include <vector>

namespace ordtensor {

struct KMeansOptions {
  int restarts = 50;
  int max_iters = 100;
  std::uint64_t seed = 0;
};

struct KMeansResult {
  /// Cluster index per row, numbered in order of first appearance.
  std::vector<int> assignments;
  Matrix centers;
  double within_ss = 0.0;
  /// Within-cluster sum of squares after each Lloyd iteration of the best restart.
  std::vector<double> objective_trace;
};

/// Lloyd's algorithm with k-means++ seeding; the restart with the smallest
/// within-cluster sum of squares wins.
KMeansResult kmeans(const Matrix& points, int k, const KMeansOptions& opts = {});

/// Rows of M_k C_(k): the mode-k principal component matrix of a Tucker fit.
Matrix principal_components(const TuckerFactors& tf, std::size_t mode);

/// K-means on the mode-`mode` principal components (0-based mode).
KMeansResult cluster_mode(const TuckerFactors& tf, std::size_t mode, int k_clusters,
                          std::uint64_t seed, const KMeansOptions& opts = {});

/// Within-cluster sum of squares for k = 1..k_max, for elbow plots.
std::vector<double> elbow_curve(const TuckerFactors& tf, std::size_t mode, int k_max,
                                std::uint64_t seed);

}  // namespace ordtensor
