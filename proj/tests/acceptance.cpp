// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance                 run every criterion
//   acceptance --criterion N   run criterion N only

#include "ordtensor/clustering.hpp"
#include "ordtensor/datagen.hpp"
#include "ordtensor/estimator.hpp"
#include "ordtensor/experiment.hpp"
#include "ordtensor/likelihood.hpp"
#include "ordtensor/link.hpp"
#include "ordtensor/metrics.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace ordtensor;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

const Link kLogistic{LinkFamily::logistic, 1.0};
const Link kProbit{LinkFamily::probit, 1.0};

DenseTensor uniform_tensor(const Dims& dims, Rng& rng, double bound) {
  DenseTensor t(dims);
  for (double& v : t.values()) v = bound * (2.0 * rng.uniform() - 1.0);
  return t;
}

OrdinalTensor uniform_labels(const Dims& dims, int levels, Rng& rng) {
  std::vector<int> labels(num_elements(dims));
  for (int& v : labels) v = 1 + static_cast<int>(rng.below(static_cast<std::size_t>(levels)));
  return make_ordinal(dims, levels, std::move(labels));
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

ExperimentConfig base_config(const Dims& dims, const Dims& rank, double alpha, int levels) {
  ExperimentConfig c;
  c.generator.dims = dims;
  c.generator.rank = rank;
  c.generator.alpha = alpha;
  c.generator.link = kProbit;
  c.generator.levels = levels;
  c.sampling = SamplingPlan::full();
  c.n_replicates = 10;
  c.base_seed = 1;
  validate(c);
  return c;
}

Verdict gradients() {
  Rng rng(1001);
  const double h = 1e-5;
  double worst = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const Link f = inst % 2 == 0 ? kLogistic : kProbit;
    const int levels = std::vector<int>{2, 3, 5}[static_cast<std::size_t>(inst % 3)];
    const LinkSpec s{f, default_cutoffs(f, levels)};
    const OrdinalTensor y = uniform_labels({4, 4, 4}, levels, rng);
    DenseTensor theta = uniform_tensor(y.dims, rng, 2.0);
    const DenseTensor g = grad_theta(y, theta, s);
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double keep = theta[i];
      theta[i] = keep + h;
      const double up = log_likelihood(y, theta, s);
      theta[i] = keep - h;
      const double down = log_likelihood(y, theta, s);
      theta[i] = keep;
      worst = std::max(worst, rel(g[i], (up - down) / (2 * h)));
    }
    const std::vector<double> gb = grad_cutoffs(y, theta, s);
    for (std::size_t l = 0; l < gb.size(); ++l) {
      LinkSpec a = s, b = s;
      a.cutoffs[l] += h;
      b.cutoffs[l] -= h;
      worst = std::max(worst, rel(gb[l], (log_likelihood(y, theta, a) - log_likelihood(y, theta, b)) / (2 * h)));
    }
  }
  return {worst <= 1e-5, "max relative error " + fmt(worst) + " (limit 1e-5)"};
}

Verdict concavity() {
  Rng rng(1002);
  double worst = -1e300;
  for (int seg = 0; seg < 100; ++seg) {
    const Link f = seg % 2 == 0 ? kLogistic : kProbit;
    const int levels = 2 + seg % 4;
    const double alpha = 0.5 + 4.5 * rng.uniform();
    const OrdinalTensor y = uniform_labels({4, 4, 4}, levels, rng);
    // Two feasible endpoints; the segment between them stays feasible.
    const DenseTensor t0 = uniform_tensor(y.dims, rng, alpha);
    const DenseTensor t1 = uniform_tensor(y.dims, rng, alpha);
    auto ordered = [&] {
      std::vector<double> b(static_cast<std::size_t>(levels - 1));
      double at = -2.0 + rng.uniform();
      for (double& v : b) {
        v = at;
        at += 0.2 + rng.uniform();
      }
      return b;
    };
    const std::vector<double> b0 = ordered(), b1 = ordered();
    auto at = [&](double s) {
      LinkSpec spec{f, b0};
      for (std::size_t l = 0; l < b0.size(); ++l) spec.cutoffs[l] = (1 - s) * b0[l] + s * b1[l];
      return log_likelihood(y, (1 - s) * t0 + s * t1, spec);
    };
    const double s = 0.1 + 0.8 * rng.uniform();
    const double t = 1e-3;
    worst = std::max(worst, at(s + t) - 2 * at(s) + at(s - t));
  }
  return {worst <= 1e-8, "max second difference " + fmt(worst) + " (limit 1e-8)"};
}

Verdict score_bounds() {
  Rng rng(1003);
  double score_excess = -1e300, hess_excess = -1e300;
  for (int inst = 0; inst < 50; ++inst) {
    const Link f = inst % 2 == 0 ? kLogistic : kProbit;
    const int levels = 2 + inst % 4;
    const double alpha = 0.5 + 5.5 * rng.uniform();
    const LinkSpec s{f, default_cutoffs(f, levels)};
    const LinkConstants c = link_constants(s, alpha);
    const OrdinalTensor y = uniform_labels({4, 4, 4}, levels, rng);
    const DenseTensor theta = uniform_tensor(y.dims, rng, alpha);
    const DenseTensor g = grad_theta(y, theta, s);
    const DenseTensor hd = hessian_theta_diag(y, theta, s);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      score_excess = std::max(score_excess, std::abs(g[i]) - c.u_alpha);
      hess_excess = std::max(hess_excess, hd[i] + c.l_alpha);
    }
  }
  return {score_excess <= 1e-9 && hess_excess <= 1e-9,
          "max |score| - U = " + fmt(score_excess) + ", max hessian + L = " + fmt(hess_excess)};
}

Verdict generative_equivalence() {
  const std::size_t n = 100000;
  double worst_z = 0.0;
  for (const Link& f : {kLogistic, kProbit}) {
    const LinkSpec s{f, default_cutoffs(f, 5)};
    std::uint64_t seed = 2000;
    for (double theta : {-1.0, 0.0, 1.0}) {
      const OrdinalTensor y = quantize_latent(DenseTensor({n}, theta), s, ++seed);
      for (int l = 1; l <= 4; ++l) {
        const double p = link_eval(f, s.cutoffs[static_cast<std::size_t>(l - 1)] - theta);
        double hits = 0.0;
        for (int v : y.labels) hits += v <= l;
        worst_z = std::max(worst_z, std::abs(hits / n - p) / std::sqrt(p * (1 - p) / n));
      }
    }
  }
  return {worst_z <= 3.0, "max |z| " + fmt(worst_z) + " (limit 3)"};
}

Verdict monotone_ascent() {
  int good = 0;
  for (int run = 0; run < 30; ++run) {
    const std::uint64_t seed = 3000 + static_cast<std::uint64_t>(run);
    const Link f = run % 2 == 0 ? kProbit : kLogistic;
    const int levels = 2 + run % 4;
    const std::size_t d = 8 + static_cast<std::size_t>(run % 3) * 2;
    const Dims rank{1 + static_cast<std::size_t>(run % 3), 2, 2};
    const double alpha = std::vector<double>{2.0, 5.0, 10.0}[static_cast<std::size_t>(run / 10)];
    const LinkSpec s{f, default_cutoffs(f, levels)};
    const auto [tf, theta] = simulate_signal({d, d, d}, rank, alpha, seed);
    OrdinalTensor y = quantize_latent(theta, s, seed + 1);
    if (run % 5 < 2) y = apply_mask(y, sample_mask(y.dims, SamplingPlan::bernoulli(0.5), seed + 2));
    FitOptions o;
    o.alpha = alpha;
    o.seed = seed;
    o.estimate_cutoffs = run % 4 == 3;
    o.init = run % 6 == 5 ? Initialization::random : Initialization::hosvd;
    const FitResult r = fit(y, rank, f, o);
    bool ok = !r.objective_trace.empty();
    for (std::size_t i = 1; i < r.objective_trace.size(); ++i) ok = ok && r.objective_trace[i] >= r.objective_trace[i - 1];
    good += ok;
  }
  return {good == 30, std::to_string(good) + "/30 traces non-decreasing"};
}

Verdict dimension_trend() {
  const std::vector<double> ds{15, 20, 25, 30};
  ExperimentConfig c = base_config({15, 15, 15}, {3, 3, 3}, 10.0, 5);
  c.sweep_axis = "d";
  c.sweep_values = ds;
  const std::vector<ExperimentRow> rows = run_experiment(c);
  std::vector<double> x, y;
  std::string means;
  for (double d : ds) {
    std::vector<double> m;
    for (const auto& r : rows) {
      if (r.value == d) m.push_back(r.mse);
    }
    x.push_back(std::log(d));
    y.push_back(std::log(mean(m)));
    means += " " + fmt(mean(m));
  }
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxy / sxx;
  return {slope >= -2.6 && slope <= -1.4, "slope " + fmt(slope) + " in [-2.6, -1.4]; mean MSE" + means};
}

Verdict signal_level() {
  const ExperimentConfig c = base_config({20, 20, 20}, {5, 5, 5}, 5.0, 5);
  int good = 0;
  std::vector<double> r1, r5, r15;
  for (int rep = 0; rep < 10; ++rep) {
    auto rel = [&](double alpha) {
      ExperimentConfig a = c;
      a.sweep_axis = "alpha";
      return run_replicate(apply_sweep_value(a, alpha), rep).row.relative_mse;
    };
    r1.push_back(rel(1.0));
    r5.push_back(rel(5.0));
    r15.push_back(rel(15.0));
    good += r1.back() > r5.back() && r15.back() > r5.back();
  }
  return {good >= 7, std::to_string(good) + "/10 replicates non-monotone (need 7); mean relative MSE at alpha 1/5/15: " +
                         fmt(mean(r1)) + " / " + fmt(mean(r5)) + " / " + fmt(mean(r15))};
}

Verdict ordinal_levels() {
  ExperimentConfig c = base_config({20, 20, 20}, {5, 5, 5}, 10.0, 5);
  c.sampling = SamplingPlan::bernoulli(0.5);
  c.sweep_axis = "L";
  c.sweep_values = {2, 5};
  const std::vector<ExperimentRow> rows = run_experiment(c);
  std::vector<double> l2, l5;
  for (const auto& r : rows) (r.value == 2 ? l2 : l5).push_back(r.relative_mse);
  return {mean(l5) < mean(l2), "mean relative MSE L=5 " + fmt(mean(l5)) + " vs L=2 " + fmt(mean(l2))};
}

Verdict bic_recovery() {
  ExperimentConfig c = base_config({20, 20, 20}, {2, 2, 2}, 10.0, 5);
  const std::vector<Dims> grid{{1, 1, 1}, {2, 2, 2}, {3, 3, 3}};
  int good = 0;
  std::string picks;
  for (int rep = 0; rep < 10; ++rep) {
    const std::uint64_t seed = c.base_seed + static_cast<std::uint64_t>(rep);
    const SimulatedData data = simulate_dataset(c, seed);
    const RankSelection sel =
        select_rank_bic(data.observed, grid, kProbit, effective_fit_options(c, seed), data.spec.cutoffs);
    good += sel.best == Dims{2, 2, 2};
    picks += " " + std::to_string(sel.best[0]);
  }
  return {good >= 7, std::to_string(good) + "/10 selected (2,2,2) (need 7); picks" + picks};
}

Verdict kl_bound() {
  Rng rng(1010);
  int violations = 0;
  double worst_ratio = 0.0;
  for (int pair = 0; pair < 100; ++pair) {
    const Link f = pair % 2 == 0 ? kLogistic : kProbit;
    const int levels = 2 + pair % 5;
    const double alpha = 0.2 + 7.8 * rng.uniform();
    const LinkSpec s{f, default_cutoffs(f, levels)};
    const DenseTensor a = uniform_tensor({4, 3, 5}, rng, alpha);
    const DenseTensor b = uniform_tensor({4, 3, 5}, rng, alpha);
    const double kl = kl_categorical(a, b, s);
    const double bound = kl_upper_bound(a, b, s, alpha);
    violations += kl > bound + 1e-9;
    worst_ratio = std::max(worst_ratio, kl / bound);
  }
  return {violations == 0, std::to_string(violations) + " violations; max kl/bound " + fmt(worst_ratio)};
}

Verdict baseline() {
  const ExperimentConfig c = base_config({15, 15, 15}, {3, 3, 3}, 10.0, 5);
  std::vector<double> ours, cont;
  for (int rep = 0; rep < 10; ++rep) {
    const std::uint64_t seed = c.base_seed + static_cast<std::uint64_t>(rep);
    const SimulatedData data = simulate_dataset(c, seed);
    const OrdinalTensor truth_labels = predict_labels(data.truth, data.spec, PredictionRule::mode);
    const FitResult r = fit(data.observed, c.generator.rank, kProbit, effective_fit_options(c, seed), data.spec.cutoffs);
    ours.push_back(mcr(truth_labels, predict_labels(r.theta_hat, r.spec(), PredictionRule::mode)));
    const ContinuousFit base = continuous_tucker_fit(data.observed, c.generator.rank);
    cont.push_back(mcr(truth_labels, round_to_labels(base.estimate, c.generator.levels)));
  }
  return {mean(ours) <= mean(cont), "mean MCR ordinal " + fmt(mean(ours)) + " vs continuous " + fmt(mean(cont))};
}

Verdict completion() {
  ExperimentConfig c = base_config({20, 20, 20}, {2, 2, 2}, 10.0, 5);
  c.sweep_axis = "rho";
  const std::vector<double> pi(8000, 1.0 / 8000);
  std::vector<double> means;
  for (double rho : {0.2, 0.4, 0.8}) {
    const ExperimentConfig a = apply_sweep_value(c, rho);
    std::vector<double> w;
    for (int rep = 0; rep < 10; ++rep) {
      const ReplicateOutcome out = run_replicate(a, rep);
      w.push_back(weighted_error(out.fit.theta_hat, out.data.truth, pi));
    }
    means.push_back(mean(w));
  }
  return {means[0] > means[1] && means[1] > means[2],
          "mean weighted error at rho 0.2/0.4/0.8: " + fmt(means[0]) + " / " + fmt(means[1]) + " / " + fmt(means[2])};
}

// Mode-1 factor with two planted row groups: indicator columns scaled to unit
// norm are orthonormal, so each group maps to one point in factor space.
Verdict clustering() {
  const std::size_t d = 20;
  const Dims dims{d, d, d}, rank{2, 2, 2};
  const LinkSpec s{kProbit, default_cutoffs(kProbit, 5)};
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(derive_seed(seed, 50));
    std::vector<int> planted(d);
    for (std::size_t i = 0; i < d; ++i) planted[i] = i < 8 ? 0 : 1;
    for (std::size_t i = d - 1; i > 0; --i) std::swap(planted[i], planted[rng.below(i + 1)]);
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d), 2);
    const double n0 = static_cast<double>(std::count(planted.begin(), planted.end(), 0));
    for (std::size_t i = 0; i < d; ++i) {
      m(static_cast<Eigen::Index>(i), planted[i]) = 1.0 / std::sqrt(planted[i] == 0 ? n0 : d - n0);
    }
    TuckerFactors tf;
    tf.core = DenseTensor(rank);
    for (double& v : tf.core.values()) v = rng.normal();
    tf.factors = {m, haar_orthonormal(d, 2, rng), haar_orthonormal(d, 2, rng)};
    DenseTensor theta = tucker_compose(tf);
    theta *= 10.0 / infinity_norm(theta);
    const OrdinalTensor y = quantize_latent(theta, s, derive_seed(seed, 51));
    FitOptions o;
    o.alpha = 10.0;
    o.seed = seed;
    const FitResult r = fit(y, rank, kProbit, o, s.cutoffs);
    std::vector<int> expect(d);
    const int first = planted[0];
    for (std::size_t i = 0; i < d; ++i) expect[i] = planted[i] == first ? 0 : 1;
    good += cluster_mode(r.factors, 0, 2, seed).assignments == expect;
  }
  return {good == 10, std::to_string(good) + "/10 planted partitions recovered"};
}

const std::vector<std::function<Verdict()>> kCriteria = {
    gradients,    concavity,      score_bounds, generative_equivalence, monotone_ascent,
    dimension_trend, signal_level, ordinal_levels, bic_recovery,        kl_bound,
    baseline,     completion,     clustering,
};

bool run_one(int n) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = kCriteria[static_cast<std::size_t>(n - 1)]();
  } catch (const std::exception& e) {
    v = {false, std::string("error: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << "criterion " << n << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail << "  ["
            << fmt(secs) << " s]" << std::endl;
  return v.pass;
}

}  // namespace

int main(int argc, char** argv) {
  const int count = static_cast<int>(kCriteria.size());
  if (argc == 3 && std::string(argv[1]) == "--criterion") {
    const int n = std::atoi(argv[2]);
    if (n < 1 || n > count) {
      std::cerr << "criterion must lie in [1, " << count << "]\n";
      return 2;
    }
    return run_one(n) ? 0 : 1;
  }
  if (argc != 1) {
    std::cerr << "usage: acceptance [--criterion N]\n";
    return 2;
  }
  int failed = 0;
  for (int n = 1; n <= count; ++n) failed += !run_one(n);
  return failed == 0 ? 0 : 1;
}
