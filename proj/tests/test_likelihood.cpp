#include "ordtensor/likelihood.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace ordtensor {
namespace {

using testing::random_labels;
using testing::random_tensor;

const Link kLogistic{LinkFamily::logistic, 1.0};
const Link kProbit{LinkFamily::probit, 1.0};

// Per-entry log-probability written directly from the CDFs.
double entry_logprob(const LinkSpec& s, int label, double theta) {
  const double upper = label == s.levels() ? 1.0 : link_eval(s.link, s.cutoffs[label - 1] - theta);
  const double lower = label == 1 ? 0.0 : link_eval(s.link, s.cutoffs[label - 2] - theta);
  return std::log(upper - lower);
}

TEST(LogLikelihood, Examples) {
  const LinkSpec s2{kProbit, {0.0}};
  OrdinalTensor y = make_ordinal({1}, 2, {2});
  EXPECT_NEAR(log_likelihood(y, DenseTensor({1}), s2), std::log(0.5), 1e-15);

  const LinkSpec s5{kProbit, default_cutoffs(kProbit, 5)};
  std::mt19937_64 gen(31);
  const OrdinalTensor y5 = random_labels({4, 3, 5}, 5, gen, 0.7);
  const double n = static_cast<double>(y5.num_observed());
  EXPECT_NEAR(log_likelihood(y5, DenseTensor({4, 3, 5}), s5), n * std::log(0.2), 1e-10);

  OrdinalTensor empty = y5;
  std::fill(empty.mask.begin(), empty.mask.end(), 0);
  std::fill(empty.labels.begin(), empty.labels.end(), 0);
  EXPECT_EQ(log_likelihood(empty, DenseTensor({4, 3, 5}), s5), 0.0);
}

TEST(LogLikelihood, SumOfEntryTerms) {
  std::mt19937_64 gen(32);
  for (const Link& f : {kLogistic, kProbit}) {
    const LinkSpec s{f, default_cutoffs(f, 4)};
    const OrdinalTensor y = random_labels({3, 4, 2}, 4, gen, 0.6);
    const DenseTensor theta = random_tensor(y.dims, gen, -2, 2);
    double want = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y.observed(i)) want += entry_logprob(s, y.labels[i], theta[i]);
    }
    EXPECT_NEAR(log_likelihood(y, theta, s), want, 1e-10);
  }
}

TEST(LogLikelihood, MultiplicitiesWeightEntries) {
  std::mt19937_64 gen(33);
  const LinkSpec s{kProbit, default_cutoffs(kProbit, 3)};
  OrdinalTensor y = random_labels({3, 3}, 3, gen);
  const DenseTensor theta = random_tensor(y.dims, gen);
  y.counts.assign(y.size(), 1);
  y.counts[4] = 3;
  OrdinalTensor plain = y;
  plain.counts.clear();
  const double extra = 2.0 * entry_logprob(s, y.labels[4], theta[4]);
  EXPECT_NEAR(log_likelihood(y, theta, s), log_likelihood(plain, theta, s) + extra, 1e-10);
}

TEST(LogLikelihood, RejectsMismatch) {
  const LinkSpec s{kProbit, {0.0}};
  const OrdinalTensor y = make_ordinal({2, 2}, 2, {1, 2, 1, 2});
  EXPECT_THROW(log_likelihood(y, DenseTensor({2, 3}), s), std::invalid_argument);
  EXPECT_THROW(log_likelihood(y, DenseTensor({2, 2}), LinkSpec{kProbit, {-1.0, 1.0}}), std::invalid_argument);
  EXPECT_THROW(make_ordinal({2}, 2, {1, 3}), std::invalid_argument);
}

TEST(GradTheta, LogisticBinaryExample) {
  const LinkSpec s{kLogistic, {0.0}};
  const OrdinalTensor y = make_ordinal({1}, 2, {2});
  EXPECT_NEAR(grad_theta(y, DenseTensor({1}), s)[0], 0.5, 1e-15);
}

TEST(GradTheta, UnobservedIsZero) {
  std::mt19937_64 gen(34);
  const LinkSpec s{kProbit, default_cutoffs(kProbit, 3)};
  const OrdinalTensor y = random_labels({4, 4}, 3, gen, 0.5);
  const DenseTensor g = grad_theta(y, random_tensor(y.dims, gen), s);
  const DenseTensor h = hessian_theta_diag(y, random_tensor(y.dims, gen), s);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!y.observed(i)) {
      EXPECT_EQ(g[i], 0.0);
      EXPECT_EQ(h[i], 0.0);
    }
  }
}

TEST(GradTheta, MatchesFiniteDifferences) {
  std::mt19937_64 gen(35);
  for (const Link& f : {kLogistic, kProbit}) {
    const LinkSpec s{f, default_cutoffs(f, 5)};
    const OrdinalTensor y = random_labels({3, 3, 3}, 5, gen);
    DenseTensor theta = random_tensor(y.dims, gen, -2, 2);
    const DenseTensor g = grad_theta(y, theta, s);
    const double h = 1e-5;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double keep = theta[i];
      theta[i] = keep + h;
      const double up = log_likelihood(y, theta, s);
      theta[i] = keep - h;
      const double down = log_likelihood(y, theta, s);
      theta[i] = keep;
      const double fd = (up - down) / (2 * h);
      EXPECT_NEAR(g[i], fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
    const ObjectiveAndGradient both = log_likelihood_with_grad(y, theta, s);
    EXPECT_NEAR(both.value, log_likelihood(y, theta, s), 1e-12);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(both.grad[i], g[i], 1e-14);
  }
}

TEST(GradCutoffs, MatchesFiniteDifferences) {
  std::mt19937_64 gen(36);
  for (const Link& f : {kLogistic, kProbit}) {
    for (int levels : {2, 3, 5}) {
      LinkSpec s{f, default_cutoffs(f, levels)};
      const OrdinalTensor y = random_labels({3, 3, 3}, levels, gen, 0.8);
      const DenseTensor theta = random_tensor(y.dims, gen, -1.5, 1.5);
      const std::vector<double> g = grad_cutoffs(y, theta, s);
      ASSERT_EQ(g.size(), static_cast<std::size_t>(levels - 1));
      const double h = 1e-5;
      for (std::size_t l = 0; l < g.size(); ++l) {
        LinkSpec up = s, down = s;
        up.cutoffs[l] += h;
        down.cutoffs[l] -= h;
        const double fd = (log_likelihood(y, theta, up) - log_likelihood(y, theta, down)) / (2 * h);
        EXPECT_NEAR(g[l], fd, 1e-6 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST(GradCutoffs, SymmetricConstruction) {
  // Mirrored labels with antisymmetric cut-offs at theta = 0: the gradient is
  // antisymmetric and its middle component vanishes.
  const LinkSpec s{kProbit, default_cutoffs(kProbit, 4)};
  const OrdinalTensor y = make_ordinal({2, 2, 2}, 4, {1, 4, 2, 3, 3, 2, 4, 1});
  const std::vector<double> g = grad_cutoffs(y, DenseTensor({2, 2, 2}), s);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_NEAR(g[0], -g[2], 1e-12);
  EXPECT_NEAR(g[1], 0.0, 1e-12);
}

TEST(GradCutoffs, EmptyMaskIsZero) {
  const LinkSpec s{kProbit, default_cutoffs(kProbit, 3)};
  OrdinalTensor y = make_ordinal({2, 2}, 3, {1, 2, 3, 1});
  std::fill(y.mask.begin(), y.mask.end(), 0);
  for (double v : grad_cutoffs(y, DenseTensor({2, 2}), s)) EXPECT_EQ(v, 0.0);
}

TEST(Hessian, LogisticBinaryExample) {
  const LinkSpec s{kLogistic, {0.0}};
  const OrdinalTensor y = make_ordinal({1}, 2, {1});
  EXPECT_NEAR(hessian_theta_diag(y, DenseTensor({1}), s)[0], -0.25, 1e-15);
}

TEST(Hessian, MatchesFiniteDifferencesAndIsNegative) {
  std::mt19937_64 gen(37);
  for (const Link& f : {kLogistic, kProbit}) {
    const LinkSpec s{f, default_cutoffs(f, 5)};
    const OrdinalTensor y = random_labels({4, 4, 3}, 5, gen, 0.8);
    DenseTensor theta = random_tensor(y.dims, gen, -3, 3);
    const DenseTensor hd = hessian_theta_diag(y, theta, s);
    const double h = 1e-5;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      if (!y.observed(i)) continue;
      EXPECT_LT(hd[i], 0.0);
      const double keep = theta[i];
      theta[i] = keep + h;
      const double up = grad_theta(y, theta, s)[i];
      theta[i] = keep - h;
      const double down = grad_theta(y, theta, s)[i];
      theta[i] = keep;
      EXPECT_NEAR(hd[i], (up - down) / (2 * h), 1e-6);
    }
  }
}

TEST(Concavity, SecondDifferencesNonPositive) {
  std::mt19937_64 gen(38);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const Link& f : {kLogistic, kProbit}) {
    const LinkSpec s{f, default_cutoffs(f, 4)};
    const OrdinalTensor y = random_labels({3, 3, 2}, 4, gen);
    for (int rep = 0; rep < 20; ++rep) {
      const DenseTensor theta = random_tensor(y.dims, gen, -2, 2);
      const DenseTensor dir = random_tensor(y.dims, gen);
      std::vector<double> db(3);
      for (double& v : db) v = 0.1 * u(gen);
      const double t = 1e-3;
      auto at = [&](double step) {
        LinkSpec shifted = s;
        for (std::size_t l = 0; l < 3; ++l) shifted.cutoffs[l] += step * db[l];
        return log_likelihood(y, theta + step * dir, shifted);
      };
      EXPECT_LE(at(t) - 2 * at(0) + at(-t), 1e-8);
    }
  }
}

}  // namespace
}  // namespace ordtensor
