#include "ordtensor/metrics.hpp"

#include "ordtensor/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace ordtensor {

namespace {

void require_same_dims(const DenseTensor& a, const DenseTensor& b) {
  if (a.dims() != b.dims()) throw std::invalid_argument("tensor dimensions differ");
}

void require_same_dims(const OrdinalTensor& a, const OrdinalTensor& b) {
  if (a.dims != b.dims || a.labels.size() != b.labels.size()) {
    throw std::invalid_argument("label tensor dimensions differ");
  }
}

double squared_distance(const DenseTensor& a, const DenseTensor& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

template <typename Score>
double label_average(const OrdinalTensor& a, const OrdinalTensor& b, Score score) {
  require_same_dims(a, b);
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a.observed(i) || !b.observed(i)) continue;
    total += score(a.labels[i], b.labels[i]);
    ++n;
  }
  if (n == 0) throw std::invalid_argument("no common observed entries");
  return total / static_cast<double>(n);
}

}  // namespace

double mse(const DenseTensor& a, const DenseTensor& b) {
  require_same_dims(a, b);
  return squared_distance(a, b) / static_cast<double>(a.size());
}

double relative_mse(const DenseTensor& a, const DenseTensor& b) {
  require_same_dims(a, b);
  const double denom = inner_product(b, b);
  if (denom == 0.0) throw std::invalid_argument("relative_mse: reference tensor is zero");
  return squared_distance(a, b) / denom;
}

double weighted_error(const DenseTensor& a, const DenseTensor& b, const std::vector<double>& pi) {
  require_same_dims(a, b);
  if (pi.size() != a.size()) throw std::invalid_argument("weight count does not match tensor size");
  double total = 0.0;
  for (double w : pi) {
    if (!(w >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("weights must sum to 1");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += pi[i] * (d * d);
  }
  return acc;
}

double mad(const OrdinalTensor& a, const OrdinalTensor& b) {
  return label_average(a, b, [](int x, int y) { return std::abs(x - y); });
}

double mcr(const OrdinalTensor& a, const OrdinalTensor& b) {
  return label_average(a, b, [](int x, int y) { return x != y ? 1.0 : 0.0; });
}

double kl_categorical(const DenseTensor& theta_a, const DenseTensor& theta_b, const LinkSpec& spec) {
  require_same_dims(theta_a, theta_b);
  validate(spec);
  double total = 0.0;
  for (std::size_t i = 0; i < theta_a.size(); ++i) {
    for (int l = 1; l <= spec.levels(); ++l) {
      const double p = std::max(category_prob(spec, theta_a[i], l), kProbabilityFloor);
      const double q = std::max(category_prob(spec, theta_b[i], l), kProbabilityFloor);
      total += p * std::log(p / q);
    }
  }
  return std::max(total, 0.0);
}

double kl_upper_bound(const DenseTensor& theta_a, const DenseTensor& theta_b, const LinkSpec& spec,
                      double alpha) {
  require_same_dims(theta_a, theta_b);
  const LinkConstants c = link_constants(spec, alpha);
  const double slope = link_deriv(spec.link, 0.0);
  const double levels = spec.levels();
  return 2.0 * (2.0 * levels - 3.0) / c.a_alpha * slope * slope * squared_distance(theta_a, theta_b);
}

MetricReport evaluate(const DenseTensor& estimate, const LinkSpec& estimate_spec,
                      const DenseTensor& truth, const LinkSpec& truth_spec,
                      const std::vector<double>* pi) {
  MetricReport r;
  r.mse = mse(estimate, truth);
  r.relative_mse = relative_mse(estimate, truth);
  const OrdinalTensor truth_labels = predict_labels(truth, truth_spec, PredictionRule::mode);
  const OrdinalTensor est_labels = predict_labels(estimate, estimate_spec, PredictionRule::mode);
  r.mad = mad(truth_labels, est_labels);
  r.mcr = mcr(truth_labels, est_labels);
  r.kl_total = kl_categorical(truth, estimate, truth_spec);
  if (pi) r.weighted_error = weighted_error(estimate, truth, *pi);
  return r;
}

}  // namespace ordtensor
