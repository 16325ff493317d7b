#include "ordtensor/cross_validation.hpp"

#include "ordtensor/datagen.hpp"
#include "ordtensor/metrics.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ordtensor {

std::vector<int> stratified_folds(const OrdinalTensor& y, int n_folds, std::uint64_t seed) {
  validate(y);
  if (n_folds < 2) throw std::invalid_argument("cross-validation needs at least two folds");
  if (y.num_observed() < static_cast<std::size_t>(n_folds)) {
    throw std::invalid_argument("fewer observed entries than folds");
  }
  std::vector<int> fold(y.size(), -1);
  Rng rng(seed);
  std::size_t offset = 0;
  for (int level = 1; level <= y.levels; ++level) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y.observed(i) && y.labels[i] == level) members.push_back(i);
    }
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[rng.below(i)]);
    }
    for (std::size_t j = 0; j < members.size(); ++j) {
      fold[members[j]] = static_cast<int>((offset + j) % static_cast<std::size_t>(n_folds));
    }
    offset += members.size();
  }
  return fold;
}

CvSummary summarize(const std::vector<double>& values) {
  CvSummary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stderr_ = std::sqrt(ss / (n - 1.0) / n);
  }
  return s;
}

CvReport cross_validate(const OrdinalTensor& y, int n_folds, const Dims& rank, const Link& link,
                        const FitOptions& opts, PredictionRule rule,
                        std::optional<std::vector<double>> cutoffs) {
  const std::vector<int> fold = stratified_folds(y, n_folds, derive_seed(opts.seed, 101));
  CvReport report;
  for (int f = 0; f < n_folds; ++f) {
    OrdinalTensor train = y;
    OrdinalTensor test = y;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (fold[i] == f) {
        train.mask[i] = 0;
        train.labels[i] = 0;
      } else {
        test.mask[i] = 0;
        test.labels[i] = 0;
      }
    }
    CvFold row;
    row.fold = f;
    row.n_train = train.num_observed();
    row.n_test = test.num_observed();
    if (row.n_train == 0 || row.n_test == 0) throw std::invalid_argument("empty cross-validation fold");
    const FitResult fitted = fit(train, rank, link, opts, cutoffs);
    const OrdinalTensor predicted = predict_labels(fitted.theta_hat, fitted.spec(), rule);
    row.mad_test = mad(test, predicted);
    row.mcr_test = mcr(test, predicted);
    row.mad_train = mad(train, predicted);
    row.mcr_train = mcr(train, predicted);
    report.folds.push_back(row);
  }
  auto collect = [&](double CvFold::*field) {
    std::vector<double> v;
    for (const auto& r : report.folds) v.push_back(r.*field);
    return summarize(v);
  };
  report.mad_test = collect(&CvFold::mad_test);
  report.mcr_test = collect(&CvFold::mcr_test);
  report.mad_train = collect(&CvFold::mad_train);
  report.mcr_train = collect(&CvFold::mcr_train);
  return report;
}

}  // namespace ordtensor
