#pragma once

// Special functions used by the closed-form covariance and error formulas.
// All functions are pure and thread-safe.

namespace bss::specfun {

/// Gamma function for a > 0. Throws DomainError for a <= 0.
double gamma_fn(double a);

/// Lower incomplete gamma integral_0^x t^{a-1} e^{-t} dt.
///
/// Returns 0 for x <= 0 (an integral over an empty range). Uses the power
/// series for x < a + 1 and the Lentz continued fraction for the upper
/// function otherwise. Throws DomainError for a <= 0.
double lower_incomplete_gamma(double a, double x);

/// Modified Bessel function of the second kind K_nu(x), x > 0.
double bessel_k(double nu, double x);

/// E|U|^p for U ~ N(0, 1).
double abs_normal_moment(double p);

}  // namespace bss::specfun
