#include "ordtensor/clustering.hpp"

#include "ordtensor/datagen.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace ordtensor {

namespace {

struct Run {
  std::vector<int> assign;
  Matrix centers;
  double wss = std::numeric_limits<double>::infinity();
  std::vector<double> trace;
};

double assign_points(const Matrix& x, const Matrix& centers, std::vector<int>& assign) {
  double wss = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Eigen::Index best = 0;
    const double d = (centers.rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff(&best);
    assign[static_cast<std::size_t>(i)] = static_cast<int>(best);
    wss += d;
  }
  return wss;
}

Matrix seed_plus_plus(const Matrix& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  Matrix centers(k, x.cols());
  centers.row(0) = x.row(static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(n))));
  Eigen::VectorXd dist = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = dist.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (pick = 0; pick < n - 1; ++pick) {
        u -= dist(pick);
        if (u < 0.0) break;
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(n)));
    }
    centers.row(c) = x.row(pick);
    dist = dist.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

Run lloyd(const Matrix& x, int k, int max_iters, Rng& rng) {
  Run run;
  run.centers = seed_plus_plus(x, k, rng);
  run.assign.assign(static_cast<std::size_t>(x.rows()), 0);
  run.wss = assign_points(x, run.centers, run.assign);
  run.trace.push_back(run.wss);
  for (int it = 0; it < max_iters; ++it) {
    Matrix sums = Matrix::Zero(k, x.cols());
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const int c = run.assign[static_cast<std::size_t>(i)];
      sums.row(c) += x.row(i);
      ++sizes[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      // An emptied cluster keeps its previous center.
      if (sizes[static_cast<std::size_t>(c)] > 0) run.centers.row(c) = sums.row(c) / sizes[static_cast<std::size_t>(c)];
    }
    std::vector<int> next(run.assign.size());
    const double wss = assign_points(x, run.centers, next);
    const bool unchanged = next == run.assign;
    run.assign = std::move(next);
    run.wss = wss;
    run.trace.push_back(wss);
    if (unchanged) break;
  }
  return run;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, int k, const KMeansOptions& opts) {
  if (k < 1 || k > points.rows()) {
    throw std::invalid_argument("cluster count " + std::to_string(k) + " must lie in [1, " +
                                std::to_string(points.rows()) + "]");
  }
  if (opts.restarts < 1 || opts.max_iters < 1) throw std::invalid_argument("invalid k-means options");
  Run best;
  for (int r = 0; r < opts.restarts; ++r) {
    Rng rng(derive_seed(opts.seed, static_cast<std::uint64_t>(r)));
    Run run = lloyd(points, k, opts.max_iters, rng);
    if (run.wss < best.wss) best = std::move(run);
  }
  // Canonical numbering: clusters in order of first appearance.
  std::vector<int> relabel(static_cast<std::size_t>(k), -1);
  int next = 0;
  KMeansResult out;
  out.assignments.resize(best.assign.size());
  for (std::size_t i = 0; i < best.assign.size(); ++i) {
    int& target = relabel[static_cast<std::size_t>(best.assign[i])];
    if (target < 0) target = next++;
    out.assignments[i] = target;
  }
  out.centers = Matrix::Zero(k, points.cols());
  for (int c = 0; c < k; ++c) {
    if (relabel[static_cast<std::size_t>(c)] >= 0) out.centers.row(relabel[static_cast<std::size_t>(c)]) = best.centers.row(c);
  }
  out.within_ss = best.wss;
  out.objective_trace = std::move(best.trace);
  return out;
}

Matrix principal_components(const TuckerFactors& tf, std::size_t mode) {
  check_tucker_shapes(tf);
  if (mode >= tf.factors.size()) throw std::invalid_argument("mode out of range");
  return tf.factors[mode] * unfold(tf.core, mode);
}

KMeansResult cluster_mode(const TuckerFactors& tf, std::size_t mode, int k_clusters,
                          std::uint64_t seed, const KMeansOptions& opts) {
  const Matrix pcs = principal_components(tf, mode);
  if (k_clusters < 1 || k_clusters > pcs.rows()) {
    throw std::invalid_argument("cluster count " + std::to_string(k_clusters) +
                                " exceeds the mode dimension " + std::to_string(pcs.rows()));
  }
  KMeansOptions o = opts;
  o.seed = seed;
  return kmeans(pcs, k_clusters, o);
}

std::vector<double> elbow_curve(const TuckerFactors& tf, std::size_t mode, int k_max,
                                std::uint64_t seed) {
  std::vector<double> wss;
  for (int k = 1; k <= k_max; ++k) wss.push_back(cluster_mode(tf, mode, k, seed).within_ss);
  return wss;
}

}  // namespace ordtensor
