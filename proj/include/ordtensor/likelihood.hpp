#pragma once

#include "ordtensor/link.hpp"
#include "ordtensor/tensor.hpp"

#include <cstdint>
#include <vector>

namespace ordtensor {

/// Labels in 1..L over a dense index grid plus the observation mask. Label 0
/// marks a missing entry. `counts`, when non-empty, gives the number of times
/// each entry was drawn (sampling with replacement); an empty vector means
/// every observed entry counts once.
struct OrdinalTensor {
  Dims dims;
  int levels = 2;
  std::vector<int> labels;
  std::vector<std::uint8_t> mask;
  std::vector<std::uint32_t> counts;

  std::size_t size() const { return labels.size(); }
  bool observed(std::size_t i) const { return mask[i] != 0; }
  /// Likelihood weight of entry i (0 when unobserved).
  double weight(std::size_t i) const {
    if (!mask[i]) return 0.0;
    return counts.empty() ? 1.0 : static_cast<double>(counts[i]);
  }
  std::size_t num_observed() const;
};

/// Fully observed tensor with the given labels.
OrdinalTensor make_ordinal(Dims dims, int levels, std::vector<int> labels);

/// Throws std::invalid_argument if dims/array lengths disagree or an
/// observed label lies outside [1, levels].
void validate(const OrdinalTensor& y);

/// Observed-entry log-likelihood
///   sum_{w in Omega} log[f(b_{y_w} - theta_w) - f(b_{y_w - 1} - theta_w)],
/// with each probability clamped to kProbabilityFloor. Zero for an empty mask.
double log_likelihood(const OrdinalTensor& y, const DenseTensor& theta, const LinkSpec& spec);

/// d/d theta_w of log_likelihood; zero at unobserved entries.
DenseTensor grad_theta(const OrdinalTensor& y, const DenseTensor& theta, const LinkSpec& spec);

/// d/d b_l of log_likelihood for l = 1..L-1.
std::vector<double> grad_cutoffs(const OrdinalTensor& y, const DenseTensor& theta,
                                 const LinkSpec& spec);

/// Diagonal of the Hessian in theta (the off-diagonal part is zero).
DenseTensor hessian_theta_diag(const OrdinalTensor& y, const DenseTensor& theta,
                               const LinkSpec& spec);

/// Objective and its theta-gradient in one pass.
struct ObjectiveAndGradient {
  double value = 0.0;
  DenseTensor grad;
};
ObjectiveAndGradient log_likelihood_with_grad(const OrdinalTensor& y, const DenseTensor& theta,
                                              const LinkSpec& spec);

}  // namespace ordtensor
