#include "ordtensor/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ordtensor {

double Rng::uniform() {
  // 53 random bits, shifted by half an ulp so the result is never 0 or 1.
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::normal() { return normal_quantile(uniform()); }

double Rng::logistic(double sigma) {
  const double u = uniform();
  return sigma * std::log(u / (1.0 - u));
}

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below requires n > 0");
  return std::min(static_cast<std::size_t>(uniform() * static_cast<double>(n)), n - 1);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Matrix haar_orthonormal(std::size_t rows, std::size_t cols, Rng& rng) {
  if (cols < 1 || cols > rows) throw std::invalid_argument("haar_orthonormal: need 1 <= cols <= rows");
  const auto r = static_cast<Eigen::Index>(rows);
  const auto c = static_cast<Eigen::Index>(cols);
  Matrix g(r, c);
  for (Eigen::Index j = 0; j < c; ++j) {
    for (Eigen::Index i = 0; i < r; ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(r, c);
  // Fixing the signs of diag(R) makes Q exactly Haar distributed.
  const Matrix rr = qr.matrixQR().topLeftCorner(c, c).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < c; ++j) {
    if (rr(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

std::pair<TuckerFactors, DenseTensor> simulate_signal(const Dims& dims, const Dims& ranks,
                                                      std::optional<double> alpha,
                                                      std::uint64_t seed) {
  check_dims(dims);
  check_ranks(dims, ranks);
  if (alpha && !(*alpha > 0.0)) throw std::invalid_argument("signal level alpha must be positive");
  Rng rng(seed);
  TuckerFactors tf;
  tf.core = DenseTensor(ranks);
  for (double& v : tf.core.values()) v = rng.normal();
  for (std::size_t k = 0; k < dims.size(); ++k) {
    tf.factors.push_back(haar_orthonormal(dims[k], ranks[k], rng));
  }
  DenseTensor theta = tucker_compose(tf);
  if (alpha) {
    const double norm = infinity_norm(theta);
    if (norm == 0.0) throw std::runtime_error("simulated signal is identically zero");
    const double scale = *alpha / norm;
    tf.core *= scale;
    theta = tucker_compose(tf);
  }
  return {std::move(tf), std::move(theta)};
}

OrdinalTensor quantize_latent(const DenseTensor& theta, const LinkSpec& spec, std::uint64_t seed) {
  validate(spec, /*allow_zero_scale=*/true);
  Rng rng(seed);
  OrdinalTensor y;
  y.dims = theta.dims();
  y.levels = spec.levels();
  y.labels.resize(theta.size());
  y.mask.assign(theta.size(), 1);
  const double sigma = spec.link.sigma;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    double latent = theta[i];
    if (sigma > 0.0) {
      latent += spec.link.family == LinkFamily::logistic ? rng.logistic(sigma)
                                                         : sigma * rng.normal();
    }
    // Label l iff latent lies in (b_{l-1}, b_l].
    const auto it = std::lower_bound(spec.cutoffs.begin(), spec.cutoffs.end(), latent);
    y.labels[i] = static_cast<int>(it - spec.cutoffs.begin()) + 1;
  }
  return y;
}

void validate(const SamplingPlan& plan, std::size_t num_entries) {
  switch (plan.kind) {
    case SamplingKind::full:
      return;
    case SamplingKind::bernoulli_uniform:
      if (!(plan.rho > 0.0 && plan.rho <= 1.0)) {
        throw std::invalid_argument("observation fraction rho must lie in (0, 1]");
      }
      return;
    case SamplingKind::with_replacement: {
      if (plan.draws < 1) throw std::invalid_argument("with-replacement sampling needs m >= 1");
      if (plan.pi_weights.empty()) return;
      if (plan.pi_weights.size() != num_entries) {
        throw std::invalid_argument("sampling weights do not match the tensor size");
      }
      double total = 0.0;
      for (double w : plan.pi_weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
          throw std::invalid_argument("sampling weights must be nonnegative");
        }
        total += w;
      }
      if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("sampling weights must sum to 1");
      return;
    }
  }
}

MaskSample sample_mask(const Dims& dims, const SamplingPlan& plan, std::uint64_t seed) {
  check_dims(dims);
  const std::size_t n = num_elements(dims);
  validate(plan, n);
  MaskSample out;
  Rng rng(seed);
  switch (plan.kind) {
    case SamplingKind::full:
      out.mask.assign(n, 1);
      break;
    case SamplingKind::bernoulli_uniform:
      out.mask.resize(n);
      for (std::size_t i = 0; i < n; ++i) out.mask[i] = rng.uniform() < plan.rho ? 1 : 0;
      break;
    case SamplingKind::with_replacement: {
      out.mask.assign(n, 0);
      out.counts.assign(n, 0);
      std::vector<double> cumulative;
      if (!plan.pi_weights.empty()) {
        cumulative.resize(n);
        std::partial_sum(plan.pi_weights.begin(), plan.pi_weights.end(), cumulative.begin());
      }
      for (std::size_t draw = 0; draw < plan.draws; ++draw) {
        std::size_t idx;
        if (cumulative.empty()) {
          idx = rng.below(n);
        } else {
          const double u = rng.uniform() * cumulative.back();
          idx = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                         cumulative.begin());
          idx = std::min(idx, n - 1);
        }
        out.mask[idx] = 1;
        ++out.counts[idx];
      }
      break;
    }
  }
  return out;
}

OrdinalTensor apply_mask(const OrdinalTensor& y, const MaskSample& sample) {
  if (sample.mask.size() != y.size()) throw std::invalid_argument("mask size does not match tensor");
  OrdinalTensor out = y;
  out.mask = sample.mask;
  out.counts = sample.counts;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!out.mask[i]) out.labels[i] = 0;
  }
  return out;
}

}  // namespace ordtensor
