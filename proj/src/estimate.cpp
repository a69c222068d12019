#include "bss/estimate.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "bss/errors.hpp"
#include "bss/specfun.hpp"
#include "bss/variation.hpp"

namespace bss {

namespace {

constexpr double kLambdaUpper = 0.25;
constexpr int kExpansionStart = 24;
constexpr int kExpansionTerms = 14;

void check_fbm_alpha(double alpha) {
  if (!(alpha > -0.5 && alpha < 0.5)) {
    throw DomainError("alpha must lie in (-1/2, 1/2), got " + std::to_string(alpha));
  }
}

void check_clt_alpha(double alpha) {
  if (!(alpha > -0.5 && alpha < kLambdaUpper)) {
    throw DomainError("alpha " + std::to_string(alpha) +
                      " is outside the CLT region (-1/2, 1/4)");
  }
}

// Generalized binomial coefficients C(s, 2k), k = 0..n-1.
void even_binomials(double s, double* out, int n) {
  double c = 1.0;
  out[0] = 1.0;
  for (int m = 1; m < 2 * n - 1; ++m) {
    c *= (s - (m - 1)) / m;
    if (m % 2 == 0) out[m / 2] = c;
  }
}

// For large j the finite differences cancel badly; expand
// (j + h)^s = j^s sum_m C(s, m) (h/j)^m and keep the even orders.
double fgn_rho_expansion(double s, double j) {
  double c[kExpansionTerms];
  even_binomials(s, c, kExpansionTerms);
  const double inv2 = 1.0 / (j * j);
  double term = inv2;
  double sum = 0.0;
  for (int k = 1; k < kExpansionTerms; ++k) {
    sum += c[k] * term;
    term *= inv2;
  }
  return std::pow(j, s) * sum;
}

double second_diff_expansion(double s, double j) {
  double c[kExpansionTerms];
  even_binomials(s, c, kExpansionTerms);
  const double inv2 = 1.0 / (j * j);
  double term = inv2 * inv2;
  double sum = 0.0;
  double four_k = 16.0;
  for (int k = 2; k < kExpansionTerms; ++k) {
    sum += c[k] * term * (8.0 - 2.0 * four_k);
    term *= inv2;
    four_k *= 4.0;
  }
  return 0.5 / (4.0 - std::pow(2.0, s)) * std::pow(j, s) * sum;
}

// Midpoint-rule tail sum_{j>J} rho(j)^2 from the two leading orders of the
// expansion rho(j) = a1 j^{s-2} + a2 j^{s-4} + ...
double fgn_tail(double s, long terms) {
  double c[3];
  even_binomials(s, c, 3);
  const double x = static_cast<double>(terms) + 0.5;
  const double q1 = 4.0 - 2.0 * s;  // exponent of a1^2 j^{2s-4}
  const double q2 = q1 + 2.0;
  const double q3 = q1 + 4.0;
  const double a1 = c[1];
  const double a2 = c[2];
  return a1 * a1 * std::pow(x, 1.0 - q1) / (q1 - 1.0) +
         2.0 * a1 * a2 * std::pow(x, 1.0 - q2) / (q2 - 1.0) +
         a2 * a2 * std::pow(x, 1.0 - q3) / (q3 - 1.0);
}

double sq(double x) { return x * x; }

}  // namespace

double fgn_rho(double alpha, int j) {
  check_fbm_alpha(alpha);
  if (j < 0) j = -j;
  if (j == 0) return 1.0;
  const double s = 2.0 * alpha + 1.0;
  if (j >= kExpansionStart) return fgn_rho_expansion(s, j);
  const double jd = j;
  return 0.5 * (std::pow(jd + 1.0, s) - 2.0 * std::pow(jd, s) + std::pow(jd - 1.0, s));
}

double second_diff_rho(double alpha, int j) {
  check_fbm_alpha(alpha);
  if (j < 0) j = -j;
  if (j == 0) return 1.0;
  const double s = 2.0 * alpha + 1.0;
  if (j >= kExpansionStart) return second_diff_expansion(s, j);
  const double jd = j;
  const double num = -std::pow(std::abs(jd - 2.0), s) + 4.0 * std::pow(jd - 1.0, s) -
                     6.0 * std::pow(jd, s) + 4.0 * std::pow(jd + 1.0, s) -
                     std::pow(jd + 2.0, s);
  return 0.5 / (4.0 - std::pow(2.0, s)) * num;
}

double lambda2_scalar(double alpha, long terms) {
  check_clt_alpha(alpha);
  if (terms < kExpansionStart) throw DomainError("lambda2_scalar: too few terms");
  const double s = 2.0 * alpha + 1.0;
  double sum = 0.0;
  for (long j = terms; j >= 1; --j) sum += sq(fgn_rho(alpha, static_cast<int>(j)));
  return 2.0 + 2.0 * (sum + fgn_tail(s, terms));
}

double lambda2_scalar(double alpha) {
  check_clt_alpha(alpha);
  if (alpha == 0.0) return 2.0;
  long terms = 4096;
  double prev = lambda2_scalar(alpha, terms);
  while (terms < 10'000'000L) {
    terms *= 2;
    const double next = lambda2_scalar(alpha, terms);
    if (std::abs(next - prev) <= 1e-12 * next) return next;
    prev = next;
  }
  return prev;
}

Lambda2Matrix lambda2_matrix(double alpha, long terms) {
  check_clt_alpha(alpha);
  const int n = static_cast<int>(terms);
  std::vector<double> r(static_cast<std::size_t>(n) + 3);
  for (int j = 0; j < n + 3; ++j) r[j] = second_diff_rho(alpha, j);
  auto rho = [&](int j) { return r[j < 0 ? -j : j]; };

  double s11 = 0.0, s12 = 0.0, s22 = 0.0;
  for (int j = n; j >= 1; --j) s11 += sq(rho(j));
  for (int j = n; j >= 0; --j) s12 += sq(rho(j) + 2.0 * rho(j + 1) + rho(j + 2));
  for (int j = n; j >= 1; --j) {
    s22 += sq(rho(j - 2) + 4.0 * rho(j - 1) + 6.0 * rho(j) + 4.0 * rho(j + 1) + rho(j + 2));
  }
  Lambda2Matrix out;
  out.l11 = 2.0 + 4.0 * s11;
  out.l12 = std::pow(2.0, 2.0 - 2.0 * alpha) * sq(rho(1) + 1.0) +
            std::pow(2.0, 1.0 - 2.0 * alpha) * s12;
  out.l22 = 2.0 + std::pow(2.0, -4.0 * alpha) * s22;
  return out;
}

Lambda2Matrix lambda2_matrix(double alpha) {
  check_clt_alpha(alpha);
  // Terms decay like j^{4 alpha - 6}; 2^13 terms leave a tail below 1e-15.
  constexpr long kTerms = 1L << 13;
  static std::shared_mutex mutex;
  static std::map<long long, Lambda2Matrix> cache;
  const long long key = std::llround(alpha * 1e12);
  {
    std::shared_lock lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const Lambda2Matrix value = lambda2_matrix(alpha, kTerms);
  std::unique_lock lock(mutex);
  if (cache.size() > 100000) cache.clear();
  cache.emplace(key, value);
  return value;
}

double CofEstimate::z_stat_vs(double alpha0) const {
  if (!std_error) throw DomainError("z statistic unavailable: no standard error");
  return (alpha_hat - alpha0) / *std_error;
}

CofEstimate cof_estimate(const SamplePath& path, double p, bool with_std_error) {
  validate_path(path, 5);
  if (!(p > 0.0)) throw DomainError("cof_estimate: p must be positive");
  const PowerVariation v1 = power_variation(path, 1, p);
  const PowerVariation v2 = power_variation(path, 2, p);
  if (!(v1.value > 0.0) || !(v2.value > 0.0)) {
    throw DegenerateError("cof_estimate: vanishing power variation (affine path?)");
  }
  CofEstimate out;
  out.p = p;
  out.cof_value = v2.value / v1.value;
  out.alpha_hat = std::log2(out.cof_value) / p - 0.5;
  out.n_used = static_cast<int>(path.n_obs());
  out.v2_p = v2.value;
  out.v2_2p = power_variation(path, 2, 2.0 * p).value;
  if (with_std_error && p == 2.0 && out.alpha_hat > -0.5 && out.alpha_hat < kLambdaUpper) {
    const double m2p = specfun::abs_normal_moment(2.0 * p);
    const double contrast = lambda2_matrix(out.alpha_hat).contrast();
    out.std_error = std::sqrt(out.v2_2p * contrast / m2p) / (out.v2_p * std::log(2.0) * p);
  }
  return out;
}

AlphaTest test_alpha(const SamplePath& path, double p, double alpha0, double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("test_alpha: level must be in (0, 1)");
  if (p != 2.0) throw DomainError("test_alpha: asymptotic covariance only known for p = 2");
  AlphaTest out;
  out.estimate = cof_estimate(path, p);
  check_clt_alpha(out.estimate.alpha_hat);
  out.level = level;
  out.z = out.estimate.z_stat_vs(alpha0);
  out.reject = std::abs(out.z) > normal_quantile(1.0 - level / 2.0);
  return out;
}

double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) throw DomainError("normal_quantile: prob must be in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), prob);
}

}  // namespace bss
