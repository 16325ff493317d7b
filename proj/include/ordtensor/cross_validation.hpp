#pragma once

#include "ordtensor/estimator.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace ordtensor {

/// Fold id per entry (-1 for unobserved). Observed entries are split by
/// label and dealt round-robin after a seeded shuffle, so within each label
/// the fold sizes differ by at most one.
std::vector<int> stratified_folds(const OrdinalTensor& y, int n_folds, std::uint64_t seed);

struct CvFold {
  int fold = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double mad_train = 0.0;
  double mcr_train = 0.0;
  double mad_test = 0.0;
  double mcr_test = 0.0;
};

struct CvSummary {
  double mean = 0.0;
  double stderr_ = 0.0;
};

struct CvReport {
  std::vector<CvFold> folds;
  CvSummary mad_test, mcr_test, mad_train, mcr_train;
};

/// Fits on all but one fold, predicts labels on the held-out fold and scores
/// them with MAD/MCR; training-fold scores are reported alongside.
CvReport cross_validate(const OrdinalTensor& y, int n_folds, const Dims& rank, const Link& link,
                        const FitOptions& opts, PredictionRule rule = PredictionRule::mode,
                        std::optional<std::vector<double>> cutoffs = std::nullopt);

CvSummary summarize(const std::vector<double>& values);

}  // namespace ordtensor
