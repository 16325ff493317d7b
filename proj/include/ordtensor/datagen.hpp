#pragma once

#include "ordtensor/likelihood.hpp"
#include "ordtensor/link.hpp"
#include "ordtensor/tensor.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace ordtensor {

/// Seeded random source. Uniforms are built from the raw 64-bit engine output
/// and all other variates by inverse CDF, so streams are identical across
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  /// Logistic noise with scale sigma.
  double logistic(double sigma);
  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Mixes a base seed with a stream id into an independent 64-bit seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// d x r matrix with orthonormal columns drawn from the Haar measure.
Matrix haar_orthonormal(std::size_t rows, std::size_t cols, Rng& rng);

/// Random Tucker signal: iid N(0,1) core, Haar factors. When `alpha` is
/// given the core is rescaled so that the composed tensor has sup-norm alpha.
std::pair<TuckerFactors, DenseTensor> simulate_signal(const Dims& dims, const Dims& ranks,
                                                      std::optional<double> alpha,
                                                      std::uint64_t seed);

/// Draws y* = theta + noise (noise law matching the link) and bins it by the
/// cut-offs into labels 1..L. sigma = 0 quantizes theta without noise.
OrdinalTensor quantize_latent(const DenseTensor& theta, const LinkSpec& spec, std::uint64_t seed);

enum class SamplingKind { full, bernoulli_uniform, with_replacement };

struct SamplingPlan {
  SamplingKind kind = SamplingKind::full;
  double rho = 1.0;
  /// Sampling distribution over entries (flat layout); empty means uniform.
  std::vector<double> pi_weights;
  std::size_t draws = 1;

  static SamplingPlan full() { return {}; }
  static SamplingPlan bernoulli(double rho) { return {SamplingKind::bernoulli_uniform, rho, {}, 1}; }
  static SamplingPlan with_replacement(std::vector<double> pi, std::size_t m) {
    return {SamplingKind::with_replacement, 1.0, std::move(pi), m};
  }
};

void validate(const SamplingPlan& plan, std::size_t num_entries);

struct MaskSample {
  std::vector<std::uint8_t> mask;
  /// Multiplicities, only filled for with_replacement plans.
  std::vector<std::uint32_t> counts;
};

MaskSample sample_mask(const Dims& dims, const SamplingPlan& plan, std::uint64_t seed);

/// Copy of y restricted to the sampled entries (labels outside the mask are
/// zeroed, multiplicities carried over).
OrdinalTensor apply_mask(const OrdinalTensor& y, const MaskSample& sample);

}  // namespace ordtensor
