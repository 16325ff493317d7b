#pragma once

#include "ordtensor/likelihood.hpp"
#include "ordtensor/link.hpp"
#include "ordtensor/tensor.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace ordtensor {

enum class Initialization {
  /// HOSVD of the centered label tensor (missing entries set to zero).
  hosvd,
  /// Haar factors and a small Gaussian core.
  random,
};

struct FitOptions {
  /// Entrywise bound on the signal tensor.
  double alpha = 10.0;
  /// Bound on |b_l|; defaults to 2 * alpha.
  std::optional<double> beta;
  /// Minimum gap between consecutive cut-offs.
  double delta = 1e-3;
  int max_outer_iters = 200;
  /// Line-searched ascent steps per block and sweep.
  int inner_steps = 5;
  /// Stop once |f_t - f_{t-1}| / max(1, |f_{t-1}|) < tol.
  double tol = 1e-6;
  std::uint64_t seed = 0;
  bool estimate_cutoffs = false;
  /// Shift theta to zero mean (and the cut-offs by the same amount) at return.
  /// Defaults to estimate_cutoffs.
  std::optional<bool> identifiability_centering;
  Initialization init = Initialization::hosvd;

  double cutoff_bound() const { return beta.value_or(2.0 * alpha); }
  bool centering() const { return identifiability_centering.value_or(estimate_cutoffs); }
};

void validate(const FitOptions& opts);

struct FitResult {
  /// Tucker factors of the fitted tensor before any centering shift.
  TuckerFactors factors;
  /// Fitted signal: tucker_compose(factors) - center_shift.
  DenseTensor theta_hat;
  std::vector<double> cutoffs_hat;
  double center_shift = 0.0;
  std::vector<double> objective_trace;
  bool converged = false;
  int iterations = 0;
  double final_objective = 0.0;
  Dims rank;
  Link link;

  LinkSpec spec() const { return {link, cutoffs_hat}; }
};

/// Block-coordinate ascent state: the current Tucker blocks, the cut-offs and
/// the cached signal tensor and objective. Each update_* call moves one block
/// by projected, line-searched gradient ascent and never lowers the objective.
class BlockAscent {
 public:
  BlockAscent(const OrdinalTensor& y, LinkSpec spec, FitOptions opts, TuckerFactors start);

  void update_factor_block(std::size_t mode);
  void update_core_block();
  void update_cutoff_block();
  /// Factor blocks in mode order, then the core, then the cut-offs when they
  /// are being estimated. Returns the objective after the sweep.
  double sweep();

  double objective() const { return objective_; }
  const TuckerFactors& tucker() const { return tucker_; }
  const DenseTensor& theta() const { return theta_; }
  const LinkSpec& spec() const { return spec_; }
  const FitOptions& options() const { return opts_; }

 private:
  struct Candidate {
    TuckerFactors tucker;
    DenseTensor theta;
  };

  /// Rescales the core so the candidate respects the sup-norm bound.
  void enforce_bound(Candidate& c) const;
  double feasibility_norm(const DenseTensor& theta) const;
  /// Accepts the candidate if it passes the Armijo test against `grad`.
  bool try_accept(Candidate&& c, const DenseTensor& grad);
  /// `grad` with outward components removed at entries near the bound.
  DenseTensor boundary_masked(const DenseTensor& grad) const;
  /// One line-searched step along `grad`; false if no step was accepted.
  bool factor_step(std::size_t mode, const DenseTensor& grad);
  bool core_step(const DenseTensor& grad);

  const OrdinalTensor& y_;
  LinkSpec spec_;
  FitOptions opts_;
  TuckerFactors tucker_;
  DenseTensor theta_;
  double objective_;
};

/// Starting point used by fit.
TuckerFactors initial_factors(const OrdinalTensor& y, const Dims& rank, const LinkSpec& spec,
                              const FitOptions& opts);

/// Rank-constrained maximum likelihood fit by alternating block ascent.
/// Cut-offs default to default_cutoffs(link, L); they are held fixed unless
/// opts.estimate_cutoffs.
FitResult fit(const OrdinalTensor& y, const Dims& rank, const Link& link, const FitOptions& opts,
              std::optional<std::vector<double>> initial_cutoffs = std::nullopt);

/// Euclidean projection onto {|b_l| <= beta, b_{l+1} - b_l >= delta}.
std::vector<double> project_cutoffs(std::vector<double> b, double beta, double delta);

/// sum_k (d_k - r_k) r_k + prod_k r_k.
double effective_parameters(const Dims& dims, const Dims& rank);

/// -2 * log-likelihood + p_e(r) * log(prod_k d_k).
double bic_score(const OrdinalTensor& y, const FitResult& fit, const Dims& rank);
double bic_from_objective(double log_likelihood, const Dims& dims, const Dims& rank);

struct RankScore {
  Dims rank;
  double objective = 0.0;
  double effective_params = 0.0;
  double bic = 0.0;
};

struct RankSelection {
  Dims best;
  /// Sorted by BIC ascending (ties as in choose_best_rank).
  std::vector<RankScore> table;
};

/// Index of the minimum-BIC row; ties go to the smaller p_e, then to the
/// lexicographically smaller rank.
std::size_t choose_best_rank(const std::vector<RankScore>& table);

RankSelection select_rank_bic(const OrdinalTensor& y, const std::vector<Dims>& rank_grid,
                              const Link& link, const FitOptions& opts,
                              std::optional<std::vector<double>> cutoffs = std::nullopt);

enum class PredictionRule { mode, median };

PredictionRule parse_prediction_rule(std::string_view name);

/// Fully observed label tensor. Mode: most probable level, ties to the
/// smallest. Median: smallest l with P(y <= l) >= 1/2.
OrdinalTensor predict_labels(const DenseTensor& theta, const LinkSpec& spec, PredictionRule rule);

struct ContinuousFit {
  TuckerFactors factors;
  DenseTensor estimate;
  /// Squared reconstruction error of the imputed tensor after each sweep.
  std::vector<double> error_trace;
};

/// Least-squares Tucker fit (HOOI) treating labels as real numbers; missing
/// entries are imputed with the observed mean.
ContinuousFit continuous_tucker_fit(const OrdinalTensor& y, const Dims& rank,
                                    int max_sweeps = 50, double tol = 1e-8);

/// HOOI on a real tensor, started from HOSVD.
ContinuousFit hooi(const DenseTensor& t, const Dims& rank, int max_sweeps = 50, double tol = 1e-8);

/// Rounds a real estimate to the nearest label in [1, L].
OrdinalTensor round_to_labels(const DenseTensor& estimate, int levels);

}  // namespace ordtensor
