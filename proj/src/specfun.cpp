#include "bss/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bss/errors.hpp"

namespace bss::specfun {

namespace {

constexpr int kMaxIterations = 10000;
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = std::numeric_limits<double>::min() / kEps;

// gamma(a, x) / Gamma(a) by the power series, valid for x < a + 1.
double regularized_lower_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxIterations; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Gamma(a, x) / Gamma(a) by the modified Lentz continued fraction,
// valid for x >= a + 1.
double regularized_upper_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_fn(double a) {
  if (!(a > 0.0)) {
    throw DomainError("gamma_fn: argument must be positive, got " + std::to_string(a));
  }
  return std::tgamma(a);
}

double lower_incomplete_gamma(double a, double x) {
  if (!(a > 0.0)) {
    throw DomainError("lower_incomplete_gamma: a must be positive, got " + std::to_string(a));
  }
  if (!(x > 0.0)) return 0.0;
  const double full = std::tgamma(a);
  if (x < a + 1.0) return full * regularized_lower_series(a, x);
  return full * (1.0 - regularized_upper_fraction(a, x));
}

double bessel_k(double nu, double x) {
  if (!(x > 0.0)) {
    throw DomainError("bessel_k: x must be positive, got " + std::to_string(x));
  }
  if (nu < 0.0) nu = -nu;  // K_{-nu} = K_nu
  return std::cyl_bessel_k(nu, x);
}

double abs_normal_moment(double p) {
  if (!(p > -1.0)) throw DomainError("abs_normal_moment: p must exceed -1");
  return std::pow(2.0, 0.5 * p) * std::tgamma(0.5 * (p + 1.0)) / std::sqrt(std::numbers::pi);
}

}  // namespace bss::specfun
