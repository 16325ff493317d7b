#include "ordtensor/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ordtensor {

namespace {

void check_inputs(const OrdinalTensor& y, const DenseTensor& theta, const LinkSpec& spec) {
  if (theta.dims() != y.dims) {
    throw std::invalid_argument("parameter tensor dimensions do not match the data");
  }
  if (spec.levels() != y.levels) {
    throw std::invalid_argument("cut-off count does not match the number of levels");
  }
  if (y.labels.size() != theta.size() || y.mask.size() != theta.size()) {
    throw std::invalid_argument("ordinal tensor arrays do not match its dimensions");
  }
}

struct EntryTerms {
  double lower;  // b_{l-1} - theta
  double upper;  // b_l - theta
  double prob;   // floored
};

EntryTerms entry_terms(const LinkSpec& spec, int label, double theta) {
  EntryTerms t;
  t.lower = lower_cutoff(spec, label) - theta;
  t.upper = upper_cutoff(spec, label) - theta;
  t.prob = std::max(interval_prob(spec.link, t.lower, t.upper), kProbabilityFloor);
  return t;
}

}  // namespace

std::size_t OrdinalTensor::num_observed() const {
  return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](auto m) { return m != 0; }));
}

OrdinalTensor make_ordinal(Dims dims, int levels, std::vector<int> labels) {
  OrdinalTensor y;
  y.dims = std::move(dims);
  y.levels = levels;
  y.labels = std::move(labels);
  y.mask.assign(y.labels.size(), 1);
  validate(y);
  return y;
}

void validate(const OrdinalTensor& y) {
  check_dims(y.dims);
  if (y.levels < 2) throw std::invalid_argument("ordinal tensor needs at least two levels");
  const std::size_t n = num_elements(y.dims);
  if (y.labels.size() != n || y.mask.size() != n) {
    throw std::invalid_argument("ordinal tensor arrays do not match its dimensions");
  }
  if (!y.counts.empty() && y.counts.size() != n) {
    throw std::invalid_argument("ordinal tensor multiplicities do not match its dimensions");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!y.mask[i]) continue;
    if (y.labels[i] < 1 || y.labels[i] > y.levels) {
      throw std::invalid_argument("observed label " + std::to_string(y.labels[i]) +
                                  " outside [1, " + std::to_string(y.levels) + "]");
    }
  }
}

double log_likelihood(const OrdinalTensor& y, const DenseTensor& theta, const LinkSpec& spec) {
  check_inputs(y, theta, spec);
  double total = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double w = y.weight(i);
    if (w == 0.0) continue;
    total += w * std::log(entry_terms(spec, y.labels[i], theta[i]).prob);
  }
  return total;
}

ObjectiveAndGradient log_likelihood_with_grad(const OrdinalTensor& y, const DenseTensor& theta,
                                              const LinkSpec& spec) {
  check_inputs(y, theta, spec);
  ObjectiveAndGradient out{0.0, DenseTensor(theta.dims())};
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double w = y.weight(i);
    if (w == 0.0) continue;
    const EntryTerms t = entry_terms(spec, y.labels[i], theta[i]);
    out.value += w * std::log(t.prob);
    out.grad[i] = w * (link_deriv(spec.link, t.lower) - link_deriv(spec.link, t.upper)) / t.prob;
  }
  return out;
}

DenseTensor grad_theta(const OrdinalTensor& y, const DenseTensor& theta, const LinkSpec& spec) {
  return log_likelihood_with_grad(y, theta, spec).grad;
}

std::vector<double> grad_cutoffs(const OrdinalTensor& y, const DenseTensor& theta,
                                 const LinkSpec& spec) {
  check_inputs(y, theta, spec);
  std::vector<double> g(spec.cutoffs.size(), 0.0);
  const int levels = spec.levels();
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double w = y.weight(i);
    if (w == 0.0) continue;
    const int label = y.labels[i];
    const EntryTerms t = entry_terms(spec, label, theta[i]);
    // b_label enters as the upper bound, b_{label-1} as the lower bound.
    if (label < levels) {
      g[static_cast<std::size_t>(label - 1)] += w * link_deriv(spec.link, t.upper) / t.prob;
    }
    if (label > 1) {
      g[static_cast<std::size_t>(label - 2)] -= w * link_deriv(spec.link, t.lower) / t.prob;
    }
  }
  return g;
}

DenseTensor hessian_theta_diag(const OrdinalTensor& y, const DenseTensor& theta,
                               const LinkSpec& spec) {
  check_inputs(y, theta, spec);
  DenseTensor h(theta.dims());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double w = y.weight(i);
    if (w == 0.0) continue;
    const EntryTerms t = entry_terms(spec, y.labels[i], theta[i]);
    const double dg = link_deriv(spec.link, t.lower) - link_deriv(spec.link, t.upper);
    const double d2g = link_second_deriv(spec.link, t.upper) - link_second_deriv(spec.link, t.lower);
    h[i] = w * (d2g * t.prob - dg * dg) / (t.prob * t.prob);
  }
  return h;
}

}  // namespace ordtensor
