#include "ordtensor/estimator.hpp"

#include "ordtensor/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ordtensor {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 40;
// Relative width of the band below the sup-norm bound treated as active.
constexpr double kBoundaryBand = 0.05;

// Re-orthonormalizes factor `mode` by thin QR and absorbs R into the core.
void orthonormalize_factor(TuckerFactors& tf, std::size_t mode) {
  Matrix& m = tf.factors[mode];
  const Eigen::Index cols = m.cols();
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), cols);
  Matrix r = qr.matrixQR().topLeftCorner(cols, cols).triangularView<Eigen::Upper>();
  // Keep diag(R) nonnegative so repeated orthonormalization is stable.
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (r(j, j) < 0) {
      q.col(j) *= -1.0;
      r.row(j) *= -1.0;
    }
  }
  m = std::move(q);
  tf.core = mode_multiply(tf.core, r, mode);
}

// Largest curvature of the per-entry negative log-likelihood, used to scale
// the cut-off step.
double curvature_scale(const Link& link) {
  const double s2 = link.sigma * link.sigma;
  return link.family == LinkFamily::probit ? 1.0 / s2 : 0.5 / s2;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

void validate(const FitOptions& opts) {
  if (!(opts.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!(opts.cutoff_bound() > 0.0)) throw std::invalid_argument("beta must be positive");
  if (!(opts.delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (opts.max_outer_iters < 1) throw std::invalid_argument("max_outer_iters must be at least 1");
  if (opts.inner_steps < 1) throw std::invalid_argument("inner_steps must be at least 1");
}

BlockAscent::BlockAscent(const OrdinalTensor& y, LinkSpec spec, FitOptions opts,
                         TuckerFactors start)
    : y_(y), spec_(std::move(spec)), opts_(std::move(opts)), tucker_(std::move(start)) {
  validate(opts_);
  validate(spec_);
  check_tucker_shapes(tucker_);
  if (tucker_.dims() != y_.dims) throw std::invalid_argument("starting factors do not match the data");
  for (std::size_t k = 0; k < tucker_.factors.size(); ++k) orthonormalize_factor(tucker_, k);
  Candidate c{tucker_, tucker_compose(tucker_)};
  enforce_bound(c);
  tucker_ = std::move(c.tucker);
  theta_ = std::move(c.theta);
  objective_ = log_likelihood(y_, theta_, spec_);
}

double BlockAscent::feasibility_norm(const DenseTensor& theta) const {
  if (!opts_.centering()) return infinity_norm(theta);
  const double mu = mean_value(theta);
  double m = 0.0;
  for (double v : theta.values()) m = std::max(m, std::abs(v - mu));
  return m;
}

void BlockAscent::enforce_bound(Candidate& c) const {
  const double norm = feasibility_norm(c.theta);
  if (norm <= opts_.alpha) return;
  c.tucker.core *= opts_.alpha / norm;
  c.theta = tucker_compose(c.tucker);
}

bool BlockAscent::try_accept(Candidate&& c, const DenseTensor& grad) {
  const double value = log_likelihood(y_, c.theta, spec_);
  const double linear = inner_product(grad, c.theta) - inner_product(grad, theta_);
  if (!(value > objective_) || value < objective_ + kArmijo * linear) return false;
  tucker_ = std::move(c.tucker);
  theta_ = std::move(c.theta);
  objective_ = value;
  return true;
}

DenseTensor BlockAscent::boundary_masked(const DenseTensor& grad) const {
  // Entries already near the bound that the gradient pushes further out are
  // dropped, so the step can move the rest of the tensor without triggering a
  // global rescale.
  const double mu = opts_.centering() ? mean_value(theta_) : 0.0;
  const double edge = (1.0 - kBoundaryBand) * opts_.alpha;
  DenseTensor g = grad;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = theta_[i] - mu;
    if (std::abs(v) >= edge && v * g[i] > 0.0) g[i] = 0.0;
  }
  return g;
}

bool BlockAscent::factor_step(std::size_t mode, const DenseTensor& grad) {
  DenseTensor partial = grad;
  for (std::size_t i = 0; i < tucker_.factors.size(); ++i) {
    if (i != mode) partial = mode_multiply(partial, tucker_.factors[i].transpose(), i);
  }
  const Matrix core_unfolded = unfold(tucker_.core, mode);
  const Matrix block_grad = unfold(partial, mode) * core_unfolded.transpose();
  if (!(block_grad.norm() > 1e-12)) return false;

  // Scale by the inverse Gram matrix of the core unfolding: with orthonormal
  // factors this is the block's Gauss-Newton metric up to a scalar.
  Matrix gram = core_unfolded * core_unfolded.transpose();
  const double ridge = 1e-8 * gram.trace() / static_cast<double>(gram.rows()) + 1e-12;
  gram.diagonal().array() += ridge;
  const Matrix direction = gram.ldlt().solve(block_grad.transpose()).transpose();

  for (double t = 1.0; t > std::ldexp(1.0, -kMaxHalvings); t *= 0.5) {
    Candidate c{tucker_, DenseTensor()};
    c.tucker.factors[mode] += t * direction;
    orthonormalize_factor(c.tucker, mode);
    c.theta = tucker_compose(c.tucker);
    enforce_bound(c);
    if (try_accept(std::move(c), grad)) return true;
  }
  return false;
}

bool BlockAscent::core_step(const DenseTensor& grad) {
  const DenseTensor direction = project_onto_factors(grad, tucker_.factors);
  if (!(frobenius_norm(direction) > 1e-12)) return false;
  for (double t = 1.0; t > std::ldexp(1.0, -kMaxHalvings); t *= 0.5) {
    Candidate c{tucker_, DenseTensor()};
    c.tucker.core += t * direction;
    c.theta = tucker_compose(c.tucker);
    enforce_bound(c);
    if (try_accept(std::move(c), grad)) return true;
  }
  return false;
}

void BlockAscent::update_factor_block(std::size_t mode) {
  if (mode >= tucker_.factors.size()) throw std::invalid_argument("factor block out of range");
  for (int step = 0; step < opts_.inner_steps; ++step) {
    const DenseTensor grad = grad_theta(y_, theta_, spec_);
    if (!factor_step(mode, grad) && !factor_step(mode, boundary_masked(grad))) return;
  }
}

void BlockAscent::update_core_block() {
  for (int step = 0; step < opts_.inner_steps; ++step) {
    const DenseTensor grad = grad_theta(y_, theta_, spec_);
    if (!core_step(grad) && !core_step(boundary_masked(grad))) return;
  }
}

void BlockAscent::update_cutoff_block() {
  const double beta = opts_.cutoff_bound();
  const int levels = spec_.levels();
  // Weighted label counts set a diagonal curvature scale for each cut-off.
  std::vector<double> counts(static_cast<std::size_t>(levels) + 1, 0.0);
  for (std::size_t i = 0; i < y_.size(); ++i) {
    const double w = y_.weight(i);
    if (w > 0.0) counts[static_cast<std::size_t>(y_.labels[i])] += w;
  }
  const double kappa = curvature_scale(spec_.link);
  for (int step = 0; step < opts_.inner_steps; ++step) {
    const std::vector<double> grad = grad_cutoffs(y_, theta_, spec_);
    std::vector<double> direction(grad.size());
    for (std::size_t l = 0; l < grad.size(); ++l) {
      direction[l] = grad[l] / (kappa * std::max(1.0, counts[l + 1] + counts[l + 2]));
    }
    if (!(std::sqrt(dot(grad, grad)) > 1e-12)) return;
    bool accepted = false;
    for (double t = 1.0; !accepted && t > std::ldexp(1.0, -kMaxHalvings); t *= 0.5) {
      std::vector<double> b = spec_.cutoffs;
      for (std::size_t l = 0; l < b.size(); ++l) b[l] += t * direction[l];
      b = project_cutoffs(std::move(b), beta, opts_.delta);
      LinkSpec candidate{spec_.link, b};
      const double value = log_likelihood(y_, theta_, candidate);
      double linear = 0.0;
      for (std::size_t l = 0; l < b.size(); ++l) linear += grad[l] * (b[l] - spec_.cutoffs[l]);
      if (value > objective_ && value >= objective_ + kArmijo * linear) {
        spec_ = std::move(candidate);
        objective_ = value;
        accepted = true;
      }
    }
    if (!accepted) return;
  }
}

double BlockAscent::sweep() {
  for (std::size_t k = 0; k < tucker_.factors.size(); ++k) update_factor_block(k);
  update_core_block();
  if (opts_.estimate_cutoffs) update_cutoff_block();
  return objective_;
}

std::vector<double> project_cutoffs(std::vector<double> b, double beta, double delta) {
  const std::size_t n = b.size();
  if (n == 0) return b;
  if (static_cast<double>(n - 1) * delta > 2.0 * beta) {
    throw std::invalid_argument("cut-off bound beta too small for the minimum gap");
  }
  // With c_l = b_l - l * delta the gap constraint is monotonicity of c, so the
  // projection is isotonic regression (pool adjacent violators) followed by
  // clipping to the box implied by |b| <= beta.
  std::vector<double> c(n);
  for (std::size_t l = 0; l < n; ++l) c[l] = b[l] - static_cast<double>(l) * delta;
  std::vector<double> block_mean;
  std::vector<std::size_t> block_size;
  for (double v : c) {
    block_mean.push_back(v);
    block_size.push_back(1);
    while (block_mean.size() > 1 && block_mean[block_mean.size() - 2] > block_mean.back()) {
      const std::size_t s1 = block_size[block_size.size() - 2];
      const std::size_t s2 = block_size.back();
      const double merged =
          (block_mean[block_mean.size() - 2] * s1 + block_mean.back() * s2) / static_cast<double>(s1 + s2);
      block_mean.pop_back();
      block_size.pop_back();
      block_mean.back() = merged;
      block_size.back() = s1 + s2;
    }
  }
  const double lo = -beta;
  const double hi = beta - static_cast<double>(n - 1) * delta;
  std::size_t l = 0;
  for (std::size_t blk = 0; blk < block_mean.size(); ++blk) {
    const double v = std::clamp(block_mean[blk], lo, hi);
    for (std::size_t j = 0; j < block_size[blk]; ++j, ++l) {
      b[l] = v + static_cast<double>(l) * delta;
    }
  }
  return b;
}

TuckerFactors initial_factors(const OrdinalTensor& y, const Dims& rank, const LinkSpec& spec,
                              const FitOptions& opts) {
  check_ranks(y.dims, rank);
  if (opts.init == Initialization::random) {
    Rng rng(derive_seed(opts.seed, 17));
    TuckerFactors tf;
    tf.core = DenseTensor(rank);
    for (double& v : tf.core.values()) v = 0.1 * rng.normal();
    for (std::size_t k = 0; k < rank.size(); ++k) {
      tf.factors.push_back(haar_orthonormal(y.dims[k], rank[k], rng));
    }
    return tf;
  }
  const std::size_t observed = y.num_observed();
  double mean = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y.observed(i)) mean += y.labels[i];
  }
  mean /= static_cast<double>(std::max<std::size_t>(observed, 1));
  // Unobserved cells are zero; dividing by the observed fraction undoes the
  // resulting shrinkage toward zero.
  const double fraction = static_cast<double>(observed) / static_cast<double>(y.size());
  DenseTensor surrogate(y.dims);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y.observed(i)) surrogate[i] = (y.labels[i] - mean) / fraction;
  }
  TuckerFactors tf = hosvd(surrogate, rank);
  const int levels = spec.levels();
  const double latent_per_label =
      levels >= 3 ? (spec.cutoffs.back() - spec.cutoffs.front()) / (levels - 2) : 2.0 * spec.link.sigma;
  tf.core *= latent_per_label;
  return tf;
}

FitResult fit(const OrdinalTensor& y, const Dims& rank, const Link& link, const FitOptions& opts,
              std::optional<std::vector<double>> initial_cutoffs) {
  validate(y);
  validate(link);
  validate(opts);
  check_ranks(y.dims, rank);
  if (y.num_observed() == 0) throw std::invalid_argument("no observed entries to fit");
  LinkSpec spec{link, initial_cutoffs ? *initial_cutoffs : default_cutoffs(link, y.levels)};
  if (spec.levels() != y.levels) {
    throw std::invalid_argument("expected " + std::to_string(y.levels - 1) + " cut-offs, got " +
                                std::to_string(spec.cutoffs.size()));
  }
  validate(spec);
  if (opts.estimate_cutoffs) {
    spec.cutoffs = project_cutoffs(spec.cutoffs, opts.cutoff_bound(), opts.delta);
  }

  BlockAscent state(y, spec, opts, initial_factors(y, rank, spec, opts));
  FitResult result;
  result.rank = rank;
  result.link = link;
  double previous = state.objective();
  for (int it = 0; it < opts.max_outer_iters; ++it) {
    const double current = state.sweep();
    result.objective_trace.push_back(current);
    result.iterations = it + 1;
    if (std::abs(current - previous) / std::max(1.0, std::abs(previous)) < opts.tol) {
      result.converged = true;
      break;
    }
    previous = current;
  }

  result.factors = state.tucker();
  result.theta_hat = state.theta();
  result.cutoffs_hat = state.spec().cutoffs;
  result.final_objective = state.objective();
  if (opts.centering()) {
    result.center_shift = mean_value(result.theta_hat);
    for (double& v : result.theta_hat.values()) v -= result.center_shift;
    for (double& b : result.cutoffs_hat) b -= result.center_shift;
  }
  return result;
}

double effective_parameters(const Dims& dims, const Dims& rank) {
  check_ranks(dims, rank);
  double total = 0.0;
  double core = 1.0;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    total += static_cast<double>((dims[k] - rank[k]) * rank[k]);
    core *= static_cast<double>(rank[k]);
  }
  return total + core;
}

double bic_from_objective(double log_likelihood, const Dims& dims, const Dims& rank) {
  return -2.0 * log_likelihood +
         effective_parameters(dims, rank) * std::log(static_cast<double>(num_elements(dims)));
}

double bic_score(const OrdinalTensor& y, const FitResult& fit, const Dims& rank) {
  const double ll = log_likelihood(y, fit.theta_hat, fit.spec());
  return bic_from_objective(ll, y.dims, rank);
}

namespace {
bool rank_score_less(const RankScore& a, const RankScore& b) {
  if (a.bic != b.bic) return a.bic < b.bic;
  if (a.effective_params != b.effective_params) return a.effective_params < b.effective_params;
  return a.rank < b.rank;
}
}  // namespace

std::size_t choose_best_rank(const std::vector<RankScore>& table) {
  if (table.empty()) throw std::invalid_argument("rank grid is empty");
  std::size_t best = 0;
  for (std::size_t i = 1; i < table.size(); ++i) {
    if (rank_score_less(table[i], table[best])) best = i;
  }
  return best;
}

RankSelection select_rank_bic(const OrdinalTensor& y, const std::vector<Dims>& rank_grid,
                              const Link& link, const FitOptions& opts,
                              std::optional<std::vector<double>> cutoffs) {
  if (rank_grid.empty()) throw std::invalid_argument("rank grid is empty");
  for (const auto& r : rank_grid) check_ranks(y.dims, r);
  RankSelection out;
  for (const auto& r : rank_grid) {
    const FitResult f = fit(y, r, link, opts, cutoffs);
    RankScore s;
    s.rank = r;
    s.objective = log_likelihood(y, f.theta_hat, f.spec());
    s.effective_params = effective_parameters(y.dims, r);
    s.bic = bic_from_objective(s.objective, y.dims, r);
    out.table.push_back(std::move(s));
  }
  out.best = out.table[choose_best_rank(out.table)].rank;
  std::stable_sort(out.table.begin(), out.table.end(), rank_score_less);
  return out;
}

PredictionRule parse_prediction_rule(std::string_view name) {
  if (name == "mode") return PredictionRule::mode;
  if (name == "median") return PredictionRule::median;
  throw std::invalid_argument("unknown prediction rule '" + std::string(name) + "'");
}

OrdinalTensor predict_labels(const DenseTensor& theta, const LinkSpec& spec, PredictionRule rule) {
  validate(spec);
  OrdinalTensor out;
  out.dims = theta.dims();
  out.levels = spec.levels();
  out.labels.resize(theta.size());
  out.mask.assign(theta.size(), 1);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double t = theta[i];
    if (rule == PredictionRule::median) {
      // Both link families are symmetric, so f(b_l - t) >= 1/2 iff t <= b_l.
      const auto it = std::lower_bound(spec.cutoffs.begin(), spec.cutoffs.end(), t);
      out.labels[i] = static_cast<int>(it - spec.cutoffs.begin()) + 1;
    } else {
      int best = 1;
      double best_p = category_prob(spec, t, 1);
      for (int l = 2; l <= spec.levels(); ++l) {
        const double p = category_prob(spec, t, l);
        if (p > best_p + 1e-12) {
          best = l;
          best_p = p;
        }
      }
      out.labels[i] = best;
    }
  }
  return out;
}

ContinuousFit hooi(const DenseTensor& t, const Dims& rank, int max_sweeps, double tol) {
  check_ranks(t.dims(), rank);
  ContinuousFit out;
  out.factors = hosvd(t, rank);
  const double total = inner_product(t, t);
  auto error = [&](const DenseTensor& core) { return std::max(0.0, total - inner_product(core, core)); };
  double previous = error(out.factors.core);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (std::size_t k = 0; k < t.order(); ++k) {
      DenseTensor partial = t;
      for (std::size_t i = 0; i < t.order(); ++i) {
        if (i != k) partial = mode_multiply(partial, out.factors.factors[i].transpose(), i);
      }
      out.factors.factors[k] = leading_left_singular_vectors(unfold(partial, k), rank[k]);
    }
    out.factors.core = project_onto_factors(t, out.factors.factors);
    const double current = error(out.factors.core);
    out.error_trace.push_back(current);
    if (std::abs(previous - current) <= tol * std::max(previous, 1e-300) || current <= 1e-28 * total) {
      break;
    }
    previous = current;
  }
  out.estimate = tucker_compose(out.factors);
  return out;
}

ContinuousFit continuous_tucker_fit(const OrdinalTensor& y, const Dims& rank, int max_sweeps,
                                    double tol) {
  validate(y);
  check_ranks(y.dims, rank);
  const std::size_t observed = y.num_observed();
  if (observed == 0) throw std::invalid_argument("no observed entries to fit");
  double mean = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y.observed(i)) mean += y.labels[i];
  }
  mean /= static_cast<double>(observed);
  DenseTensor values(y.dims, mean);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y.observed(i)) values[i] = y.labels[i];
  }
  return hooi(values, rank, max_sweeps, tol);
}

OrdinalTensor round_to_labels(const DenseTensor& estimate, int levels) {
  OrdinalTensor out;
  out.dims = estimate.dims();
  out.levels = levels;
  out.labels.resize(estimate.size());
  out.mask.assign(estimate.size(), 1);
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double r = std::round(std::clamp(estimate[i], 1.0, static_cast<double>(levels)));
    out.labels[i] = static_cast<int>(r);
  }
  return out;
}

}  // namespace ordtensor
