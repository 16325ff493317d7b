#include "cli_commands.hpp"

#include "ordtensor/cross_validation.hpp"
#include "ordtensor/estimator.hpp"
#include "ordtensor/experiment.hpp"
#include "ordtensor/metrics.hpp"
#include "ordtensor/tensor_io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

namespace ordtensor::cli {

namespace {

namespace fs = std::filesystem;

// Flags shared by every command that runs the estimator.
struct FitFlags {
  double alpha = 10.0;
  std::string link = "probit";
  double sigma = 1.0;
  bool estimate_cutoffs = false;
  std::string cutoffs;
  std::uint64_t seed = 0;
  int max_iters = 200;
  double tol = 1e-6;
  std::string init = "hosvd";

  void attach(CLI::App* app) {
    app->add_option("--alpha", alpha, "Entrywise bound on the signal")->capture_default_str();
    app->add_option("--link", link, "probit or logistic")->capture_default_str();
    app->add_option("--sigma", sigma, "Noise scale of the link")->capture_default_str();
    app->add_flag("--estimate-cutoffs", estimate_cutoffs, "Estimate cut-offs jointly");
    app->add_option("--cutoffs", cutoffs, "Initial cut-offs, comma separated");
    app->add_option("--seed", seed, "Random seed")->capture_default_str();
    app->add_option("--max-iters", max_iters, "Maximum outer iterations")->capture_default_str();
    app->add_option("--tol", tol, "Relative objective tolerance")->capture_default_str();
    app->add_option("--init", init, "hosvd or random")->capture_default_str();
  }

  Link make_link() const {
    Link l{parse_link_family(link), sigma};
    validate(l);
    return l;
  }

  FitOptions options() const {
    FitOptions o;
    o.alpha = alpha;
    o.estimate_cutoffs = estimate_cutoffs;
    o.seed = seed;
    o.max_outer_iters = max_iters;
    o.tol = tol;
    if (init == "hosvd") {
      o.init = Initialization::hosvd;
    } else if (init == "random") {
      o.init = Initialization::random;
    } else {
      throw std::invalid_argument("unknown --init '" + init + "'");
    }
    validate(o);
    return o;
  }

  std::optional<std::vector<double>> initial_cutoffs() const {
    if (cutoffs.empty()) return std::nullopt;
    std::vector<double> b;
    std::stringstream ss(cutoffs);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        b.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw std::invalid_argument("malformed --cutoffs '" + cutoffs + "'");
      }
    }
    return b;
  }
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(12) << v;
  return ss.str();
}

OrdinalTensor read_ordinal(const std::string& path) {
  return ordinal_tensor_from_json(read_json_file(path));
}

// --- simulate ---------------------------------------------------------------

struct SimulateCmd {
  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed;

  void run(std::ostream& out) const {
    ExperimentConfig c = experiment_config_from_json(read_json_file(config));
    const std::uint64_t s = seed.value_or(c.base_seed);
    const SimulatedData data = simulate_dataset(c, s);
    const fs::path dir(out_dir);
    const fs::path truth = dir / "truth.json";
    const fs::path observed = dir / "observed.json";
    const fs::path manifest = dir / "manifest.json";
    write_json_file(truth, to_json(data.truth));
    write_json_file(observed, to_json(data.observed));
    Json m = {{"config", to_json(c)},
              {"seed", s},
              {"cutoffs", data.spec.cutoffs},
              {"link", {{"family", std::string(to_string(data.spec.link.family))},
                        {"sigma", data.spec.link.sigma}}},
              {"observed_entries", data.observed.num_observed()},
              {"truth", truth.filename().string()},
              {"observed", observed.filename().string()}};
    write_json_file(manifest, m);
    out << truth.string() << '\n' << observed.string() << '\n' << manifest.string() << '\n';
  }
};

// --- fit --------------------------------------------------------------------

struct FitCmd {
  std::string input;
  std::string rank;
  std::string out_path;
  FitFlags flags;

  void run(std::ostream& out, std::ostream& err) const {
    const OrdinalTensor y = read_ordinal(input);
    const Dims r = parse_rank(rank);
    check_ranks(y.dims, r);
    const FitOptions opts = flags.options();
    const FitResult result = fit(y, r, flags.make_link(), opts, flags.initial_cutoffs());
    const double bic = bic_score(y, result, r);
    if (!std::isfinite(result.final_objective)) throw std::runtime_error("fit produced a non-finite objective");
    write_json_file(out_path, fit_to_json(result, opts.alpha, bic));
    if (!result.converged) {
      err << "warning: stopped after " << result.iterations << " iterations without converging\n";
    }
    out << out_path << '\n';
  }
};

// --- rank-select ------------------------------------------------------------

struct RankSelectCmd {
  std::string input;
  std::string grid;
  std::string out_path;
  FitFlags flags;

  void run(std::ostream& out) const {
    const OrdinalTensor y = read_ordinal(input);
    const std::vector<Dims> ranks = parse_rank_grid(grid);
    const RankSelection sel =
        select_rank_bic(y, ranks, flags.make_link(), flags.options(), flags.initial_cutoffs());
    std::ostringstream csv;
    csv << "rank,objective,p_e,BIC\n";
    for (const auto& row : sel.table) {
      csv << format_rank(row.rank, 'x') << ',' << fmt(row.objective) << ',' << fmt(row.effective_params)
          << ',' << fmt(row.bic) << '\n';
    }
    if (out_path.empty()) {
      out << csv.str();
    } else {
      write_text_file(out_path, csv.str());
      out << out_path << '\n';
    }
    out << "best " << format_rank(sel.best) << '\n';
  }
};

// --- cv ---------------------------------------------------------------------

struct CvCmd {
  std::string input;
  std::string rank;
  int folds = 5;
  std::string metric = "both";
  std::string rule = "mode";
  std::string out_path;
  FitFlags flags;

  void run(std::ostream& out) const {
    if (metric != "mad" && metric != "mcr" && metric != "both") {
      throw std::invalid_argument("--metric must be mad, mcr or both");
    }
    const OrdinalTensor y = read_ordinal(input);
    const Dims r = parse_rank(rank);
    const CvReport rep = cross_validate(y, folds, r, flags.make_link(), flags.options(),
                                        parse_prediction_rule(rule), flags.initial_cutoffs());
    const bool with_mad = metric != "mcr";
    const bool with_mcr = metric != "mad";
    std::ostringstream csv;
    csv << "fold,n_train,n_test";
    if (with_mad) csv << ",mad_train,mad_test";
    if (with_mcr) csv << ",mcr_train,mcr_test";
    csv << '\n';
    for (const auto& f : rep.folds) {
      csv << f.fold << ',' << f.n_train << ',' << f.n_test;
      if (with_mad) csv << ',' << fmt(f.mad_train) << ',' << fmt(f.mad_test);
      if (with_mcr) csv << ',' << fmt(f.mcr_train) << ',' << fmt(f.mcr_test);
      csv << '\n';
    }
    auto summary_row = [&](const char* name, auto pick) {
      csv << name << ",,";
      if (with_mad) csv << ',' << fmt(pick(rep.mad_train)) << ',' << fmt(pick(rep.mad_test));
      if (with_mcr) csv << ',' << fmt(pick(rep.mcr_train)) << ',' << fmt(pick(rep.mcr_test));
      csv << '\n';
    };
    summary_row("mean", [](const CvSummary& s) { return s.mean; });
    summary_row("stderr", [](const CvSummary& s) { return s.stderr_; });
    if (out_path.empty()) {
      out << csv.str();
    } else {
      write_text_file(out_path, csv.str());
      out << out_path << '\n';
    }
  }
};

// --- predict ----------------------------------------------------------------

struct PredictCmd {
  std::string fit_path;
  std::string rule = "mode";
  std::string out_path;

  void run(std::ostream& out) const {
    const FitResult f = fit_from_json(read_json_file(fit_path));
    const OrdinalTensor labels = predict_labels(f.theta_hat, f.spec(), parse_prediction_rule(rule));
    write_json_file(out_path, to_json(labels, EntryLayout::dense));
    out << out_path << '\n';
  }
};

// --- metrics ----------------------------------------------------------------

struct MetricsCmd {
  std::string fit_path;
  std::string truth_path;
  std::string manifest_path;

  void run(std::ostream& out) const {
    const FitResult f = fit_from_json(read_json_file(fit_path));
    const DenseTensor truth = dense_tensor_from_json(read_json_file(truth_path));
    if (truth.dims() != f.theta_hat.dims()) throw DataError("truth and fit dimensions differ");
    LinkSpec truth_spec{f.link, default_cutoffs(f.link, f.spec().levels())};
    if (!manifest_path.empty()) {
      const Json m = read_json_file(manifest_path);
      try {
        truth_spec.cutoffs = m.at("cutoffs").get<std::vector<double>>();
        truth_spec.link = {parse_link_family(m.at("link").at("family").get<std::string>()),
                           m.at("link").at("sigma").get<double>()};
      } catch (const Json::exception& e) {
        throw DataError(std::string("malformed manifest: ") + e.what());
      }
    }
    const MetricReport r = evaluate(f.theta_hat, f.spec(), truth, truth_spec);
    const Json j = {{"mse", r.mse}, {"relative_mse", r.relative_mse}, {"mad", r.mad},
                    {"mcr", r.mcr}, {"kl", r.kl_total}};
    out << j.dump(1) << '\n';
  }
};

// --- experiment -------------------------------------------------------------

struct ExperimentCmd {
  std::string config;
  std::string out_path;

  void run(std::ostream& out) const {
    const ExperimentConfig c = experiment_config_from_json(read_json_file(config));
    const std::string csv = experiment_csv(run_experiment(c));
    const std::string path = out_path.empty() ? c.output : out_path;
    if (path.empty()) {
      out << csv;
    } else {
      write_text_file(path, csv);
      out << path << '\n';
    }
  }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ordinal tensor decomposition"};
  app.require_subcommand(1);

  SimulateCmd simulate;
  auto* sim = app.add_subcommand("simulate", "Simulate a signal tensor and ordinal observations");
  sim->add_option("--config", simulate.config, "Experiment config (JSON)")->required();
  sim->add_option("--out-dir", simulate.out_dir, "Output directory")->required();
  sim->add_option("--seed", simulate.seed, "Override the config's base seed");

  FitCmd fitc;
  auto* fit_app = app.add_subcommand("fit", "Fit a low-rank ordinal model");
  fit_app->add_option("--input", fitc.input, "Ordinal tensor file")->required();
  fit_app->add_option("--rank", fitc.rank, "Tucker rank, e.g. 2,2,2")->required();
  fit_app->add_option("--out", fitc.out_path, "Fit output file")->required();
  fitc.flags.attach(fit_app);

  RankSelectCmd rs;
  auto* rs_app = app.add_subcommand("rank-select", "Choose the Tucker rank by BIC");
  rs_app->add_option("--input", rs.input, "Ordinal tensor file")->required();
  rs_app->add_option("--grid", rs.grid, "Candidate ranks, e.g. 1,1,1;2,2,2")->required();
  rs_app->add_option("--out", rs.out_path, "CSV output (stdout if omitted)");
  rs.flags.attach(rs_app);

  CvCmd cv;
  auto* cv_app = app.add_subcommand("cv", "Stratified cross-validation of label prediction");
  cv_app->add_option("--input", cv.input, "Ordinal tensor file")->required();
  cv_app->add_option("--rank", cv.rank, "Tucker rank")->required();
  cv_app->add_option("--folds", cv.folds, "Number of folds")->capture_default_str();
  cv_app->add_option("--metric", cv.metric, "mad, mcr or both")->capture_default_str();
  cv_app->add_option("--rule", cv.rule, "mode or median")->capture_default_str();
  cv_app->add_option("--out", cv.out_path, "CSV output (stdout if omitted)");
  cv.flags.attach(cv_app);

  PredictCmd pred;
  auto* pred_app = app.add_subcommand("predict", "Predict labels from a fit");
  pred_app->add_option("--fit", pred.fit_path, "Fit file")->required();
  pred_app->add_option("--rule", pred.rule, "mode or median")->capture_default_str();
  pred_app->add_option("--out", pred.out_path, "Label tensor output")->required();

  MetricsCmd met;
  auto* met_app = app.add_subcommand("metrics", "Compare a fit with the true signal");
  met_app->add_option("--fit", met.fit_path, "Fit file")->required();
  met_app->add_option("--truth", met.truth_path, "True signal tensor file")->required();
  met_app->add_option("--manifest", met.manifest_path, "Simulation manifest with the true cut-offs");

  ExperimentCmd exp;
  auto* exp_app = app.add_subcommand("experiment", "Run a seeded simulation sweep");
  exp_app->add_option("--config", exp.config, "Experiment config (JSON)")->required();
  exp_app->add_option("--out", exp.out_path, "CSV output (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (sim->parsed()) simulate.run(out);
    if (fit_app->parsed()) fitc.run(out, err);
    if (rs_app->parsed()) rs.run(out);
    if (cv_app->parsed()) cv.run(out);
    if (pred_app->parsed()) pred.run(out);
    if (met_app->parsed()) met.run(out);
    if (exp_app->parsed()) exp.run(out);
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
  return kOk;
}

}  // namespace ordtensor::cli
