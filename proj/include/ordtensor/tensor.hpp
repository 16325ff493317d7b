#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace ordtensor {

using Dims = std::vector<std::size_t>;
using Matrix = Eigen::MatrixXd;

/// Product of all extents.
std::size_t num_elements(const Dims& dims);

/// Throws std::invalid_argument unless dims is non-empty with positive extents.
void check_dims(const Dims& dims);

/// Flat offset of a (0-based) multi-index; the first index varies fastest.
std::size_t linear_index(const Dims& dims, std::span<const std::size_t> index);

/// Inverse of linear_index.
std::vector<std::size_t> multi_index(const Dims& dims, std::size_t offset);

/// Order-K real array stored with the first index varying fastest.
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(Dims dims, double fill = 0.0);
  DenseTensor(Dims dims, std::vector<double> values);

  const Dims& dims() const { return dims_; }
  std::size_t order() const { return dims_.size(); }
  std::size_t size() const { return values_.size(); }
  std::size_t dim(std::size_t mode) const { return dims_.at(mode); }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double at(std::span<const std::size_t> index) const {
    return values_[linear_index(dims_, index)];
  }
  double& at(std::span<const std::size_t> index) {
    return values_[linear_index(dims_, index)];
  }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  DenseTensor& operator+=(const DenseTensor& other);
  DenseTensor& operator-=(const DenseTensor& other);
  DenseTensor& operator*=(double s);

  friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

 private:
  Dims dims_;
  std::vector<double> values_;
};

DenseTensor operator+(DenseTensor a, const DenseTensor& b);
DenseTensor operator-(DenseTensor a, const DenseTensor& b);
DenseTensor operator*(double s, DenseTensor a);

/// Sum of entrywise products; dims must agree.
double inner_product(const DenseTensor& a, const DenseTensor& b);
double frobenius_norm(const DenseTensor& t);
double infinity_norm(const DenseTensor& t);
double mean_value(const DenseTensor& t);

/// Mode-`mode` unfolding (0-based mode), a d_mode x prod_{i != mode} d_i
/// matrix. Columns enumerate the remaining indices with the smallest mode
/// varying fastest, so the unfolding is a reshape of the flat layout.
Matrix unfold(const DenseTensor& t, std::size_t mode);

/// Exact inverse of unfold.
DenseTensor refold(const Matrix& m, std::size_t mode, const Dims& dims);

/// t x_mode m: contracts the columns of m with mode `mode` of t.
DenseTensor mode_multiply(const DenseTensor& t, const Matrix& m, std::size_t mode);

/// Tucker representation: core x_1 M_1 ... x_K M_K with each factor d_k x r_k.
struct TuckerFactors {
  DenseTensor core;
  std::vector<Matrix> factors;

  Dims ranks() const { return core.dims(); }
  Dims dims() const;
};

/// Throws std::invalid_argument on inconsistent shapes.
void check_tucker_shapes(const TuckerFactors& tf);

DenseTensor tucker_compose(const TuckerFactors& tf);

/// t x_1 M_1^T ... x_K M_K^T.
DenseTensor project_onto_factors(const DenseTensor& t, const std::vector<Matrix>& factors);

/// Largest deviation of M^T M from the identity.
double orthonormality_error(const Matrix& m);

/// Truncated higher-order SVD. Factor k holds the top-r_k left singular
/// vectors of unfold(t, k); the core is t projected onto the factors.
TuckerFactors hosvd(const DenseTensor& t, const Dims& ranks);

/// Top-`rank` left singular vectors of m, with a deterministic sign (the
/// largest-magnitude entry of each column is positive).
Matrix leading_left_singular_vectors(const Matrix& m, std::size_t rank);

/// Throws std::invalid_argument unless ranks has one entry per mode with
/// 1 <= r_k <= d_k. The message names the offending (1-based) mode.
void check_ranks(const Dims& dims, const Dims& ranks);

}  // namespace ordtensor
