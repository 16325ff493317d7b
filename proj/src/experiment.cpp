#include "ordtensor/experiment.hpp"

#include "ordtensor/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace ordtensor {

namespace {

std::string sampling_kind_name(SamplingKind k) {
  switch (k) {
    case SamplingKind::full:
      return "full";
    case SamplingKind::bernoulli_uniform:
      return "bernoulli";
    case SamplingKind::with_replacement:
      return "with_replacement";
  }
  return "full";
}

SamplingKind parse_sampling_kind(const std::string& s) {
  if (s == "full") return SamplingKind::full;
  if (s == "bernoulli" || s == "bernoulli_uniform" || s == "uniform") return SamplingKind::bernoulli_uniform;
  if (s == "with_replacement") return SamplingKind::with_replacement;
  throw std::invalid_argument("unknown sampling kind '" + s + "'");
}

std::size_t as_count(double v, const char* what) {
  if (!(v >= 1.0) || v != std::floor(v)) {
    throw std::invalid_argument(std::string(what) + " must be a positive integer");
  }
  return static_cast<std::size_t>(v);
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

std::string format_number(double v) {
  std::ostringstream ss;
  ss << std::setprecision(12) << v;
  return ss.str();
}

}  // namespace

ExperimentConfig experiment_config_from_json(const Json& j) {
  ExperimentConfig c;
  try {
    if (j.contains("generator")) {
      const Json& g = j.at("generator");
      c.generator.dims = get_or<Dims>(g, "dims", c.generator.dims);
      c.generator.rank = get_or<Dims>(g, "rank", c.generator.rank);
      c.generator.alpha = get_or<double>(g, "alpha", c.generator.alpha);
      c.generator.link.family = parse_link_family(get_or<std::string>(g, "link", "probit"));
      c.generator.link.sigma = get_or<double>(g, "sigma", 1.0);
      c.generator.levels = get_or<int>(g, "levels", c.generator.levels);
    }
    if (j.contains("sampling")) {
      const Json& s = j.at("sampling");
      c.sampling.kind = parse_sampling_kind(get_or<std::string>(s, "kind", "full"));
      c.sampling.rho = get_or<double>(s, "rho", 1.0);
      if (c.sampling.kind == SamplingKind::with_replacement) {
        if (s.contains("m")) {
          c.sampling.draws = s.at("m").get<std::size_t>();
        } else {
          const double n = static_cast<double>(num_elements(c.generator.dims));
          c.sampling.draws = static_cast<std::size_t>(std::llround(c.sampling.rho * n));
        }
      }
    }
    if (j.contains("fit")) {
      const Json& f = j.at("fit");
      FitOptions& o = c.fit.options;
      if (f.contains("rank")) c.fit.rank = f.at("rank").get<Dims>();
      if (f.contains("rank_grid")) c.fit.rank_grid = f.at("rank_grid").get<std::vector<Dims>>();
      if (f.contains("alpha")) c.fit.alpha = f.at("alpha").get<double>();
      if (f.contains("beta")) o.beta = f.at("beta").get<double>();
      o.delta = get_or<double>(f, "delta", o.delta);
      o.max_outer_iters = get_or<int>(f, "max_outer_iters", o.max_outer_iters);
      o.inner_steps = get_or<int>(f, "inner_steps", o.inner_steps);
      o.tol = get_or<double>(f, "tol", o.tol);
      o.estimate_cutoffs = get_or<bool>(f, "estimate_cutoffs", o.estimate_cutoffs);
      if (f.contains("identifiability_centering")) {
        o.identifiability_centering = f.at("identifiability_centering").get<bool>();
      }
      const std::string init = get_or<std::string>(f, "init", "hosvd");
      if (init == "hosvd") {
        o.init = Initialization::hosvd;
      } else if (init == "random") {
        o.init = Initialization::random;
      } else {
        throw std::invalid_argument("unknown initialization '" + init + "'");
      }
    }
    if (j.contains("replication")) {
      const Json& r = j.at("replication");
      c.n_replicates = get_or<int>(r, "n_replicates", c.n_replicates);
      c.base_seed = get_or<std::uint64_t>(r, "base_seed", c.base_seed);
    }
    if (j.contains("sweep")) {
      const Json& s = j.at("sweep");
      c.sweep_axis = s.at("axis").get<std::string>();
      c.sweep_values = s.at("values").get<std::vector<double>>();
    }
    c.output = get_or<std::string>(j, "output", "");
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("malformed experiment config: ") + e.what());
  }
  validate(c);
  return c;
}

Json to_json(const ExperimentConfig& c) {
  Json fit = {{"delta", c.fit.options.delta},
              {"max_outer_iters", c.fit.options.max_outer_iters},
              {"inner_steps", c.fit.options.inner_steps},
              {"tol", c.fit.options.tol},
              {"estimate_cutoffs", c.fit.options.estimate_cutoffs},
              {"init", c.fit.options.init == Initialization::hosvd ? "hosvd" : "random"}};
  if (c.fit.rank) fit["rank"] = *c.fit.rank;
  if (!c.fit.rank_grid.empty()) fit["rank_grid"] = c.fit.rank_grid;
  if (c.fit.alpha) fit["alpha"] = *c.fit.alpha;
  if (c.fit.options.beta) fit["beta"] = *c.fit.options.beta;
  if (c.fit.options.identifiability_centering) {
    fit["identifiability_centering"] = *c.fit.options.identifiability_centering;
  }
  Json sampling = {{"kind", sampling_kind_name(c.sampling.kind)}, {"rho", c.sampling.rho}};
  if (c.sampling.kind == SamplingKind::with_replacement) sampling["m"] = c.sampling.draws;
  Json j = {
      {"generator",
       {{"dims", c.generator.dims},
        {"rank", c.generator.rank},
        {"alpha", c.generator.alpha},
        {"link", std::string(to_string(c.generator.link.family))},
        {"sigma", c.generator.link.sigma},
        {"levels", c.generator.levels}}},
      {"sampling", sampling},
      {"fit", fit},
      {"replication", {{"n_replicates", c.n_replicates}, {"base_seed", c.base_seed}}},
      {"output", c.output},
  };
  if (!c.sweep_axis.empty()) j["sweep"] = {{"axis", c.sweep_axis}, {"values", c.sweep_values}};
  return j;
}

void validate(const ExperimentConfig& c) {
  check_dims(c.generator.dims);
  check_ranks(c.generator.dims, c.generator.rank);
  if (!(c.generator.alpha > 0.0)) throw std::invalid_argument("generator alpha must be positive");
  validate(c.generator.link);
  if (c.generator.levels < 2) throw std::invalid_argument("levels must be at least 2");
  validate(c.sampling, num_elements(c.generator.dims));
  if (c.fit.rank) check_ranks(c.generator.dims, *c.fit.rank);
  for (const auto& r : c.fit.rank_grid) check_ranks(c.generator.dims, r);
  if (c.fit.alpha && !(*c.fit.alpha > 0.0)) throw std::invalid_argument("fit alpha must be positive");
  FitOptions o = c.fit.options;
  o.alpha = c.fit.alpha.value_or(c.generator.alpha);
  validate(o);
  if (c.n_replicates < 1) throw std::invalid_argument("n_replicates must be at least 1");
  if (!c.sweep_axis.empty()) {
    if (c.sweep_values.empty()) throw std::invalid_argument("sweep needs at least one value");
    for (double v : c.sweep_values) {
      const ExperimentConfig applied = apply_sweep_value(c, v);
      ExperimentConfig flat = applied;
      flat.sweep_axis.clear();
      validate(flat);
    }
  }
}

ExperimentConfig apply_sweep_value(const ExperimentConfig& config, double value) {
  ExperimentConfig c = config;
  const std::string& axis = config.sweep_axis;
  if (axis == "d") {
    const std::size_t d = as_count(value, "sweep value for d");
    std::fill(c.generator.dims.begin(), c.generator.dims.end(), d);
    if (c.sampling.kind == SamplingKind::with_replacement) {
      const double n = static_cast<double>(num_elements(c.generator.dims));
      c.sampling.draws = static_cast<std::size_t>(std::llround(c.sampling.rho * n));
    }
  } else if (axis == "alpha") {
    if (!(value > 0.0)) throw std::invalid_argument("sweep value for alpha must be positive");
    c.generator.alpha = value;
    c.fit.alpha = value;
  } else if (axis == "rho") {
    if (!(value > 0.0 && value <= 1.0)) throw std::invalid_argument("sweep value for rho must lie in (0, 1]");
    if (c.sampling.kind == SamplingKind::with_replacement) {
      c.sampling.rho = value;
      c.sampling.draws = static_cast<std::size_t>(
          std::llround(value * static_cast<double>(num_elements(c.generator.dims))));
    } else {
      c.sampling = SamplingPlan::bernoulli(value);
    }
  } else if (axis == "L") {
    const std::size_t levels = as_count(value, "sweep value for L");
    if (levels < 2) throw std::invalid_argument("sweep value for L must be at least 2");
    c.generator.levels = static_cast<int>(levels);
  } else {
    throw std::invalid_argument("unknown sweep axis '" + axis + "' (expected d, alpha, rho or L)");
  }
  return c;
}

SimulatedData simulate_dataset(const ExperimentConfig& config, std::uint64_t seed) {
  SimulatedData out;
  auto [factors, truth] =
      simulate_signal(config.generator.dims, config.generator.rank, config.generator.alpha,
                      derive_seed(seed, 1));
  out.signal_factors = std::move(factors);
  out.truth = std::move(truth);
  out.spec = LinkSpec{config.generator.link, default_cutoffs(config.generator.link, config.generator.levels)};
  const OrdinalTensor full = quantize_latent(out.truth, out.spec, derive_seed(seed, 2));
  out.observed = apply_mask(full, sample_mask(config.generator.dims, config.sampling, derive_seed(seed, 3)));
  return out;
}

FitOptions effective_fit_options(const ExperimentConfig& config, std::uint64_t seed) {
  FitOptions o = config.fit.options;
  o.alpha = config.fit.alpha.value_or(config.generator.alpha);
  o.seed = seed;
  return o;
}

Dims effective_fit_rank(const ExperimentConfig& config) {
  return config.fit.rank.value_or(config.generator.rank);
}

ReplicateOutcome run_replicate(const ExperimentConfig& config, int replicate) {
  ReplicateOutcome out;
  const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(replicate);
  out.data = simulate_dataset(config, seed);
  const FitOptions opts = effective_fit_options(config, seed);
  Dims rank = effective_fit_rank(config);
  if (!config.fit.rank_grid.empty()) {
    rank = select_rank_bic(out.data.observed, config.fit.rank_grid, config.generator.link, opts,
                           out.data.spec.cutoffs)
               .best;
  }
  out.fit = fit(out.data.observed, rank, config.generator.link, opts, out.data.spec.cutoffs);
  const MetricReport m = evaluate(out.fit.theta_hat, out.fit.spec(), out.data.truth, out.data.spec);
  ExperimentRow& row = out.row;
  row.axis = config.sweep_axis.empty() ? "none" : config.sweep_axis;
  row.replicate = replicate;
  row.seed = seed;
  row.mse = m.mse;
  row.relative_mse = m.relative_mse;
  row.mad = m.mad;
  row.mcr = m.mcr;
  row.objective = out.fit.final_objective;
  row.converged = out.fit.converged;
  return out;
}

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config) {
  validate(config);
  std::vector<ExperimentRow> rows;
  const std::vector<double> values =
      config.sweep_axis.empty() ? std::vector<double>{0.0} : config.sweep_values;
  for (double v : values) {
    const ExperimentConfig applied = config.sweep_axis.empty() ? config : apply_sweep_value(config, v);
    for (int r = 0; r < config.n_replicates; ++r) {
      ExperimentRow row = run_replicate(applied, r).row;
      row.value = v;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string experiment_csv(const std::vector<ExperimentRow>& rows) {
  std::ostringstream out;
  out << kExperimentCsvHeader << "\n";
  for (const auto& r : rows) {
    out << r.axis << ',' << format_number(r.value) << ',' << r.replicate << ',' << r.seed << ','
        << format_number(r.mse) << ',' << format_number(r.relative_mse) << ','
        << format_number(r.mad) << ',' << format_number(r.mcr) << ','
        << format_number(r.objective) << ',' << (r.converged ? 1 : 0) << "\n";
  }
  return out.str();
}

std::vector<ExperimentRow> parse_experiment_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kExperimentCsvHeader) {
    throw std::invalid_argument("experiment CSV has an unexpected header");
  }
  std::vector<ExperimentRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 10) throw std::invalid_argument("experiment CSV row has the wrong width");
    ExperimentRow r;
    r.axis = cells[0];
    r.value = std::stod(cells[1]);
    r.replicate = std::stoi(cells[2]);
    r.seed = std::stoull(cells[3]);
    r.mse = std::stod(cells[4]);
    r.relative_mse = std::stod(cells[5]);
    r.mad = std::stod(cells[6]);
    r.mcr = std::stod(cells[7]);
    r.objective = std::stod(cells[8]);
    r.converged = cells[9] == "1";
    rows.push_back(r);
  }
  return rows;
}

}  // namespace ordtensor
