#pragma once

#include "ordtensor/datagen.hpp"
#include "ordtensor/estimator.hpp"
#include "ordtensor/tensor_io.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ordtensor {

struct GeneratorConfig {
  Dims dims{20, 20, 20};
  Dims rank{3, 3, 3};
  /// Sup-norm of the simulated signal.
  double alpha = 10.0;
  Link link{LinkFamily::probit, 1.0};
  int levels = 5;
};

struct FitConfig {
  FitOptions options;
  /// Unset fields fall back to the generator: rank, and alpha for the bound.
  std::optional<Dims> rank;
  std::optional<double> alpha;
  /// When non-empty, each replicate selects its rank by BIC over this grid.
  std::vector<Dims> rank_grid;
};

struct ExperimentConfig {
  GeneratorConfig generator;
  SamplingPlan sampling;
  FitConfig fit;
  int n_replicates = 1;
  std::uint64_t base_seed = 1;
  /// One of d, alpha, rho, L; empty for a single setting.
  std::string sweep_axis;
  std::vector<double> sweep_values;
  std::string output;
};

/// Parses the JSON experiment document:
///   {"generator": {"dims", "rank", "alpha", "link", "sigma", "levels"},
///    "sampling": {"kind": "full" | "bernoulli" | "with_replacement", "rho", "m"},
///    "fit": {"rank" | "rank_grid", "alpha", "beta", "delta", "max_outer_iters",
///            "inner_steps", "tol", "estimate_cutoffs", "init"},
///    "replication": {"n_replicates", "base_seed"},
///    "sweep": {"axis", "values"}, "output": path}
/// Throws std::invalid_argument on invalid values.
ExperimentConfig experiment_config_from_json(const Json& j);
Json to_json(const ExperimentConfig& config);

/// Checks every setting against the preconditions of the modules it feeds.
void validate(const ExperimentConfig& config);

/// Copy of the config with the sweep axis set to `value`.
ExperimentConfig apply_sweep_value(const ExperimentConfig& config, double value);

struct SimulatedData {
  TuckerFactors signal_factors;
  DenseTensor truth;
  LinkSpec spec;
  OrdinalTensor observed;
};

/// Signal, quantized labels and the observation mask for one seed.
SimulatedData simulate_dataset(const ExperimentConfig& config, std::uint64_t seed);

FitOptions effective_fit_options(const ExperimentConfig& config, std::uint64_t seed);
Dims effective_fit_rank(const ExperimentConfig& config);

struct ExperimentRow {
  std::string axis;
  double value = 0.0;
  int replicate = 0;
  std::uint64_t seed = 0;
  double mse = 0.0;
  double relative_mse = 0.0;
  double mad = 0.0;
  double mcr = 0.0;
  double objective = 0.0;
  bool converged = false;
};

struct ReplicateOutcome {
  SimulatedData data;
  FitResult fit;
  ExperimentRow row;
};

ReplicateOutcome run_replicate(const ExperimentConfig& config, int replicate);

/// Every (sweep value, replicate) pair, ordered by value then replicate.
std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config);

inline constexpr const char* kExperimentCsvHeader =
    "axis,value,replicate,seed,mse,relative_mse,mad,mcr,objective,converged";

std::string experiment_csv(const std::vector<ExperimentRow>& rows);
std::vector<ExperimentRow> parse_experiment_csv(const std::string& text);

}  // namespace ordtensor
