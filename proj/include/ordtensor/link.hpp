#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ordtensor {

enum class LinkFamily { logistic, probit };

std::string_view to_string(LinkFamily family);
/// Accepts "logistic"/"logit" and "probit"; throws std::invalid_argument otherwise.
LinkFamily parse_link_family(std::string_view name);

/// A link function f: the CDF of the latent noise, logistic or Gaussian with
/// scale sigma.
struct Link {
  LinkFamily family = LinkFamily::probit;
  double sigma = 1.0;
};

/// Link plus the cut-off points b_1 < ... < b_{L-1}. Labels run over 1..L.
struct LinkSpec {
  Link link;
  std::vector<double> cutoffs;

  int levels() const { return static_cast<int>(cutoffs.size()) + 1; }
};

/// Throws std::invalid_argument unless sigma > 0 (or >= 0 when allowed), there
/// is at least one cut-off, and the cut-offs are finite and strictly increasing.
void validate(const LinkSpec& spec, bool allow_zero_scale = false);
void validate(const Link& link);

double link_eval(const Link& f, double x);
/// 1 - f(x), computed without cancellation in the upper tail.
double link_survival(const Link& f, double x);
/// f'(x).
double link_deriv(const Link& f, double x);
/// f''(x).
double link_second_deriv(const Link& f, double x);
/// f^{-1}(p) for p in (0, 1).
double link_inverse(const Link& f, double p);

/// Standard normal CDF and quantile, exposed for the noise sampler.
double normal_cdf(double x);
double normal_quantile(double p);

/// (f^{-1}(1/L), ..., f^{-1}((L-1)/L)): cut-offs making every level equally
/// likely at theta = 0.
std::vector<double> default_cutoffs(const Link& f, int levels);

/// P(lower < eps <= upper) for eps ~ f; infinite bounds allowed.
double interval_prob(const Link& f, double lower, double upper);

/// Lower and upper latent bounds of `level`: (b_{level-1}, b_level] with
/// b_0 = -inf and b_L = +inf.
double lower_cutoff(const LinkSpec& spec, int level);
double upper_cutoff(const LinkSpec& spec, int level);

/// P(y = level | theta) = f(b_level - theta) - f(b_{level-1} - theta).
double category_prob(const LinkSpec& spec, double theta, int level);

/// First and second derivatives in theta of category_prob.
double category_prob_deriv(const LinkSpec& spec, double theta, int level);
double category_prob_second_deriv(const LinkSpec& spec, double theta, int level);

/// Extremal constants of the category probabilities over |theta| <= alpha:
///   a_alpha = min g_l,  u_alpha = max |g_l'| / g_l,
///   l_alpha = min (g_l'^2 - g_l'' g_l) / g_l^2,
/// with g_l(theta) = f(b_l - theta) - f(b_{l-1} - theta).
struct LinkConstants {
  double a_alpha = 0.0;
  double u_alpha = 0.0;
  double l_alpha = 0.0;
  double alpha = 0.0;
};

/// Evaluated on the grid theta = -alpha + j * 1e-3 * alpha, j = 0..2000.
LinkConstants link_constants(const LinkSpec& spec, double alpha);

/// Probabilities below this are clamped before taking logarithms or dividing.
inline constexpr double kProbabilityFloor = 1e-12;

}  // namespace ordtensor
