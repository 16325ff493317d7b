#pragma once

#include "ordtensor/likelihood.hpp"
#include "ordtensor/link.hpp"
#include "ordtensor/tensor.hpp"

#include <optional>
#include <vector>

namespace ordtensor {

/// (1 / prod d_k) * ||a - b||_F^2.
double mse(const DenseTensor& a, const DenseTensor& b);

/// ||a - b||_F^2 / ||b||_F^2; b is the reference and must be nonzero.
double relative_mse(const DenseTensor& a, const DenseTensor& b);

/// sum_w pi_w (a_w - b_w)^2 with pi summing to one.
double weighted_error(const DenseTensor& a, const DenseTensor& b, const std::vector<double>& pi);

/// Mean |a_w - b_w| over entries observed in both tensors.
double mad(const OrdinalTensor& a, const OrdinalTensor& b);
/// Fraction of entries observed in both tensors whose labels differ.
double mcr(const OrdinalTensor& a, const OrdinalTensor& b);

/// sum_w KL(P(y_w | theta_a) || P(y_w | theta_b)) over all entries.
double kl_categorical(const DenseTensor& theta_a, const DenseTensor& theta_b, const LinkSpec& spec);

/// 2 (2L - 3) / A_alpha * f'(0)^2 * ||theta_a - theta_b||_F^2.
double kl_upper_bound(const DenseTensor& theta_a, const DenseTensor& theta_b, const LinkSpec& spec,
                      double alpha);

struct MetricReport {
  double mse = 0.0;
  double relative_mse = 0.0;
  double mad = 0.0;
  double mcr = 0.0;
  double kl_total = 0.0;
  std::optional<double> weighted_error;
};

/// Compares an estimate with the truth: tensor errors plus MAD/MCR between
/// the mode labels predicted from each (each under its own cut-offs).
MetricReport evaluate(const DenseTensor& estimate, const LinkSpec& estimate_spec,
                      const DenseTensor& truth, const LinkSpec& truth_spec,
                      const std::vector<double>* pi = nullptr);

}  // namespace ordtensor
