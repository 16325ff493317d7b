#include "ordtensor/link.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ordtensor {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Acklam's rational approximation, relative error about 1.2e-9.
double normal_quantile_guess(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549671303315690e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

std::string_view to_string(LinkFamily family) {
  return family == LinkFamily::logistic ? "logistic" : "probit";
}

LinkFamily parse_link_family(std::string_view name) {
  if (name == "logistic" || name == "logit") return LinkFamily::logistic;
  if (name == "probit") return LinkFamily::probit;
  throw std::invalid_argument("unknown link family '" + std::string(name) + "'");
}

void validate(const Link& link) {
  if (!(link.sigma > 0.0) || !std::isfinite(link.sigma)) {
    throw std::invalid_argument("link scale sigma must be positive");
  }
}

void validate(const LinkSpec& spec, bool allow_zero_scale) {
  const double s = spec.link.sigma;
  if (!std::isfinite(s) || s < 0.0 || (s == 0.0 && !allow_zero_scale)) {
    throw std::invalid_argument("link scale sigma must be positive");
  }
  if (spec.cutoffs.empty()) throw std::invalid_argument("at least two ordinal levels required");
  for (std::size_t i = 0; i < spec.cutoffs.size(); ++i) {
    if (!std::isfinite(spec.cutoffs[i])) throw std::invalid_argument("cut-offs must be finite");
    if (i > 0 && !(spec.cutoffs[i] > spec.cutoffs[i - 1])) {
      throw std::invalid_argument("cut-offs must be strictly increasing");
    }
  }
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile requires p in (0, 1)");
  double x = normal_quantile_guess(p);
  // Two Halley steps bring the guess to full double precision.
  for (int it = 0; it < 2; ++it) {
    // Phi(x) - p, using the upper tail when p > 1/2 to avoid cancellation.
    const double e = p < 0.5 ? normal_cdf(x) - p : (1.0 - p) - 0.5 * std::erfc(x * kInvSqrt2);
    const double u = e / normal_pdf(x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double link_eval(const Link& f, double x) {
  if (x == kInf) return 1.0;
  if (x == -kInf) return 0.0;
  const double z = x / f.sigma;
  return f.family == LinkFamily::logistic ? logistic(z) : normal_cdf(z);
}

double link_survival(const Link& f, double x) {
  if (x == kInf) return 0.0;
  if (x == -kInf) return 1.0;
  const double z = x / f.sigma;
  return f.family == LinkFamily::logistic ? logistic(-z) : 0.5 * std::erfc(z * kInvSqrt2);
}

double link_deriv(const Link& f, double x) {
  if (std::isinf(x)) return 0.0;
  const double z = x / f.sigma;
  if (f.family == LinkFamily::logistic) return logistic(z) * logistic(-z) / f.sigma;
  return normal_pdf(z) / f.sigma;
}

double link_second_deriv(const Link& f, double x) {
  if (std::isinf(x)) return 0.0;
  const double z = x / f.sigma;
  if (f.family == LinkFamily::logistic) {
    const double lo = logistic(z);
    const double hi = logistic(-z);
    return lo * hi * (hi - lo) / (f.sigma * f.sigma);
  }
  return -z * normal_pdf(z) / (f.sigma * f.sigma);
}

double link_inverse(const Link& f, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("link_inverse requires p in (0, 1)");
  if (f.family == LinkFamily::logistic) return f.sigma * std::log(p / (1.0 - p));
  return f.sigma * normal_quantile(p);
}

std::vector<double> default_cutoffs(const Link& f, int levels) {
  if (levels < 2) throw std::invalid_argument("default_cutoffs requires L >= 2");
  validate(f);
  std::vector<double> b(static_cast<std::size_t>(levels - 1));
  for (int l = 1; l < levels; ++l) {
    b[static_cast<std::size_t>(l - 1)] = link_inverse(f, static_cast<double>(l) / levels);
  }
  // Enforce exact antisymmetry about zero.
  for (std::size_t i = 0, j = b.size() - 1; i < j; ++i, --j) {
    const double m = 0.5 * (b[j] - b[i]);
    b[i] = -m;
    b[j] = m;
  }
  if (b.size() % 2 == 1) b[b.size() / 2] = 0.0;
  return b;
}

double interval_prob(const Link& f, double lower, double upper) {
  if (lower > 0.0) return link_survival(f, lower) - link_survival(f, upper);
  return link_eval(f, upper) - link_eval(f, lower);
}

double lower_cutoff(const LinkSpec& spec, int level) {
  return level <= 1 ? -kInf : spec.cutoffs[static_cast<std::size_t>(level - 2)];
}

double upper_cutoff(const LinkSpec& spec, int level) {
  return level >= spec.levels() ? kInf : spec.cutoffs[static_cast<std::size_t>(level - 1)];
}

namespace {
void check_level(const LinkSpec& spec, int level) {
  if (level < 1 || level > spec.levels()) {
    throw std::invalid_argument("level " + std::to_string(level) + " outside [1, " +
                                std::to_string(spec.levels()) + "]");
  }
}
}  // namespace

double category_prob(const LinkSpec& spec, double theta, int level) {
  check_level(spec, level);
  return interval_prob(spec.link, lower_cutoff(spec, level) - theta,
                       upper_cutoff(spec, level) - theta);
}

double category_prob_deriv(const LinkSpec& spec, double theta, int level) {
  check_level(spec, level);
  return link_deriv(spec.link, lower_cutoff(spec, level) - theta) -
         link_deriv(spec.link, upper_cutoff(spec, level) - theta);
}

double category_prob_second_deriv(const LinkSpec& spec, double theta, int level) {
  check_level(spec, level);
  return link_second_deriv(spec.link, upper_cutoff(spec, level) - theta) -
         link_second_deriv(spec.link, lower_cutoff(spec, level) - theta);
}

LinkConstants link_constants(const LinkSpec& spec, double alpha) {
  validate(spec);
  if (!(alpha > 0.0)) throw std::invalid_argument("link_constants requires alpha > 0");
  LinkConstants out;
  out.alpha = alpha;
  out.a_alpha = kInf;
  out.l_alpha = kInf;
  auto curvature = [&](double theta, int l) {
    const double g = std::max(category_prob(spec, theta, l), kProbabilityFloor);
    const double dg = category_prob_deriv(spec, theta, l);
    const double d2g = category_prob_second_deriv(spec, theta, l);
    return (dg * dg - d2g * g) / (g * g);
  };
  constexpr int kSteps = 2000;
  const double h = 2.0 * alpha / kSteps;
  auto grid = [&](int j) { return j == kSteps ? alpha : -alpha + j * h; };
  for (int l = 1; l <= spec.levels(); ++l) {
    double best_curv = kInf;
    int best_j = 0;
    for (int j = 0; j <= kSteps; ++j) {
      const double theta = grid(j);
      const double g = std::max(category_prob(spec, theta, l), kProbabilityFloor);
      const double dg = category_prob_deriv(spec, theta, l);
      out.a_alpha = std::min(out.a_alpha, g);
      out.u_alpha = std::max(out.u_alpha, std::abs(dg) / g);
      const double c = curvature(theta, l);
      if (c < best_curv) {
        best_curv = c;
        best_j = j;
      }
    }
    // g and |g'|/g peak at the ends of the interval, but the curvature can
    // bottom out between grid points; polish it by golden-section search.
    double lo = grid(std::max(best_j - 1, 0));
    double hi = grid(std::min(best_j + 1, kSteps));
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 80 && hi - lo > 1e-14 * alpha; ++it) {
      const double a = hi - ratio * (hi - lo);
      const double b = lo + ratio * (hi - lo);
      if (curvature(a, l) < curvature(b, l)) {
        hi = b;
      } else {
        lo = a;
      }
    }
    best_curv = std::min(best_curv, curvature(0.5 * (lo + hi), l));
    out.l_alpha = std::min(out.l_alpha, best_curv);
  }
  return out;
}

}  // namespace ordtensor
