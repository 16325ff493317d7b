#include "ordtensor/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ordtensor {

namespace {

void require_same_dims(const DenseTensor& a, const DenseTensor& b, const char* what) {
  if (a.dims() != b.dims()) {
    throw std::invalid_argument(std::string(what) + ": tensor dimensions differ");
  }
}

// Extents to the left and right of `mode` in the flat layout.
std::pair<std::size_t, std::size_t> split_extents(const Dims& dims, std::size_t mode) {
  std::size_t left = 1;
  for (std::size_t i = 0; i < mode; ++i) left *= dims[i];
  std::size_t right = 1;
  for (std::size_t i = mode + 1; i < dims.size(); ++i) right *= dims[i];
  return {left, right};
}

}  // namespace

std::size_t num_elements(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

void check_dims(const Dims& dims) {
  if (dims.empty()) throw std::invalid_argument("tensor order must be at least 1");
  for (std::size_t d : dims) {
    if (d == 0) throw std::invalid_argument("tensor extents must be positive");
  }
}

std::size_t linear_index(const Dims& dims, std::span<const std::size_t> index) {
  if (index.size() != dims.size()) throw std::invalid_argument("index order mismatch");
  std::size_t offset = 0;
  std::size_t stride = 1;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (index[k] >= dims[k]) throw std::out_of_range("tensor index out of range");
    offset += index[k] * stride;
    stride *= dims[k];
  }
  return offset;
}

std::vector<std::size_t> multi_index(const Dims& dims, std::size_t offset) {
  std::vector<std::size_t> index(dims.size());
  for (std::size_t k = 0; k < dims.size(); ++k) {
    index[k] = offset % dims[k];
    offset /= dims[k];
  }
  return index;
}

DenseTensor::DenseTensor(Dims dims, double fill) : dims_(std::move(dims)) {
  check_dims(dims_);
  values_.assign(num_elements(dims_), fill);
}

DenseTensor::DenseTensor(Dims dims, std::vector<double> values)
    : dims_(std::move(dims)), values_(std::move(values)) {
  check_dims(dims_);
  if (values_.size() != num_elements(dims_)) {
    throw std::invalid_argument("value count does not match tensor dimensions");
  }
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& other) {
  require_same_dims(*this, other, "operator+=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& other) {
  require_same_dims(*this, other, "operator-=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

DenseTensor& DenseTensor::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }
DenseTensor operator*(double s, DenseTensor a) { return a *= s; }

double inner_product(const DenseTensor& a, const DenseTensor& b) {
  require_same_dims(a, b, "inner_product");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double frobenius_norm(const DenseTensor& t) {
  double acc = 0.0;
  for (double v : t.values()) acc += v * v;
  return std::sqrt(acc);
}

double infinity_norm(const DenseTensor& t) {
  double m = 0.0;
  for (double v : t.values()) m = std::max(m, std::abs(v));
  return m;
}

double mean_value(const DenseTensor& t) {
  if (t.size() == 0) return 0.0;
  double acc = 0.0;
  for (double v : t.values()) acc += v;
  return acc / static_cast<double>(t.size());
}

Matrix unfold(const DenseTensor& t, std::size_t mode) {
  if (mode >= t.order()) throw std::invalid_argument("unfold: mode out of range");
  const auto [left, right] = split_extents(t.dims(), mode);
  const std::size_t n = t.dim(mode);
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(left * right));
  const auto v = t.values();
  for (std::size_t c = 0; c < right; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t src = left * (i + n * c);
      for (std::size_t a = 0; a < left; ++a) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a + left * c)) = v[src + a];
      }
    }
  }
  return m;
}

DenseTensor refold(const Matrix& m, std::size_t mode, const Dims& dims) {
  check_dims(dims);
  if (mode >= dims.size()) throw std::invalid_argument("refold: mode out of range");
  const auto [left, right] = split_extents(dims, mode);
  const std::size_t n = dims[mode];
  if (static_cast<std::size_t>(m.rows()) != n ||
      static_cast<std::size_t>(m.cols()) != left * right) {
    throw std::invalid_argument("refold: matrix shape does not match dims and mode");
  }
  DenseTensor t(dims);
  auto v = t.values();
  for (std::size_t c = 0; c < right; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t dst = left * (i + n * c);
      for (std::size_t a = 0; a < left; ++a) {
        v[dst + a] = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a + left * c));
      }
    }
  }
  return t;
}

DenseTensor mode_multiply(const DenseTensor& t, const Matrix& m, std::size_t mode) {
  if (mode >= t.order()) throw std::invalid_argument("mode_multiply: mode out of range");
  const std::size_t n = t.dim(mode);
  if (static_cast<std::size_t>(m.cols()) != n) {
    throw std::invalid_argument("mode_multiply: matrix column count must equal d_mode (" +
                                std::to_string(n) + ")");
  }
  const std::size_t rows = static_cast<std::size_t>(m.rows());
  if (rows == 0) throw std::invalid_argument("mode_multiply: matrix has no rows");
  Dims out_dims = t.dims();
  out_dims[mode] = rows;
  const auto [left, right] = split_extents(t.dims(), mode);
  DenseTensor out(out_dims);
  const auto src = t.values();
  auto dst = out.values();
  for (std::size_t c = 0; c < right; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      const double* in = src.data() + left * (i + n * c);
      for (std::size_t j = 0; j < rows; ++j) {
        const double w = m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
        if (w == 0.0) continue;
        double* o = dst.data() + left * (j + rows * c);
        for (std::size_t a = 0; a < left; ++a) o[a] += w * in[a];
      }
    }
  }
  return out;
}

Dims TuckerFactors::dims() const {
  Dims d;
  d.reserve(factors.size());
  for (const auto& f : factors) d.push_back(static_cast<std::size_t>(f.rows()));
  return d;
}

void check_tucker_shapes(const TuckerFactors& tf) {
  check_dims(tf.core.dims());
  if (tf.factors.size() != tf.core.order()) {
    throw std::invalid_argument("tucker: factor count must equal core order");
  }
  for (std::size_t k = 0; k < tf.factors.size(); ++k) {
    const auto& f = tf.factors[k];
    if (static_cast<std::size_t>(f.cols()) != tf.core.dim(k) || f.rows() < 1) {
      throw std::invalid_argument("tucker: factor " + std::to_string(k + 1) +
                                  " shape does not match the core");
    }
  }
}

DenseTensor tucker_compose(const TuckerFactors& tf) {
  check_tucker_shapes(tf);
  DenseTensor out = tf.core;
  for (std::size_t k = 0; k < tf.factors.size(); ++k) {
    out = mode_multiply(out, tf.factors[k], k);
  }
  return out;
}

DenseTensor project_onto_factors(const DenseTensor& t, const std::vector<Matrix>& factors) {
  if (factors.size() != t.order()) {
    throw std::invalid_argument("project_onto_factors: factor count must equal tensor order");
  }
  DenseTensor out = t;
  for (std::size_t k = 0; k < factors.size(); ++k) {
    out = mode_multiply(out, factors[k].transpose(), k);
  }
  return out;
}

double orthonormality_error(const Matrix& m) {
  const Matrix gram = m.transpose() * m;
  return (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

void check_ranks(const Dims& dims, const Dims& ranks) {
  if (ranks.size() != dims.size()) {
    throw std::invalid_argument("rank vector has " + std::to_string(ranks.size()) +
                                " entries but the tensor has order " +
                                std::to_string(dims.size()));
  }
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (ranks[k] < 1 || ranks[k] > dims[k]) {
      throw std::invalid_argument("rank " + std::to_string(ranks[k]) + " for mode " +
                                  std::to_string(k + 1) + " must lie in [1, " +
                                  std::to_string(dims[k]) + "]");
    }
  }
}

Matrix leading_left_singular_vectors(const Matrix& m, std::size_t rank) {
  const auto n = static_cast<std::size_t>(m.rows());
  if (rank < 1 || rank > n) throw std::invalid_argument("singular vector count out of range");
  // Eigen-decomposition of the (small) Gram matrix; eigenvalues come back ascending.
  const Matrix gram = m * m.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success) throw std::runtime_error("eigen-decomposition failed");
  Matrix u(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rank));
  for (std::size_t j = 0; j < rank; ++j) {
    u.col(static_cast<Eigen::Index>(j)) = eig.eigenvectors().col(static_cast<Eigen::Index>(n - 1 - j));
  }
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    Eigen::Index arg = 0;
    u.col(j).cwiseAbs().maxCoeff(&arg);
    if (u(arg, j) < 0) u.col(j) *= -1.0;
  }
  return u;
}

TuckerFactors hosvd(const DenseTensor& t, const Dims& ranks) {
  check_ranks(t.dims(), ranks);
  TuckerFactors tf;
  tf.factors.reserve(t.order());
  for (std::size_t k = 0; k < t.order(); ++k) {
    tf.factors.push_back(leading_left_singular_vectors(unfold(t, k), ranks[k]));
  }
  tf.core = project_onto_factors(t, tf.factors);
  return tf;
}

}  // namespace ordtensor
