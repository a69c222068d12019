#pragma once

#include <optional>

#include "bss/simulate.hpp"

namespace bss {

/// Change-of-frequency estimate of the smoothness parameter.
struct CofEstimate {
  double alpha_hat = 0.0;
  double p = 2.0;
  /// V_2 / V_1: second-difference power variations at lags 2 and 1.
  double cof_value = 1.0;
  int n_used = 0;
  /// Asymptotic standard error of alpha_hat. Only available for p = 2 with
  /// alpha_hat inside (-1/2, 1/4).
  std::optional<double> std_error;
  /// V_2 of order p and 2p, kept for the CLT statistic.
  double v2_p = 0.0;
  double v2_2p = 0.0;

  double z_stat_vs(double alpha0) const;
};

struct Lambda2Matrix {
  double l11 = 0.0;
  double l12 = 0.0;
  double l22 = 0.0;

  /// e1' L e1 with e1 = (-1, 1).
  double contrast() const { return l11 - 2.0 * l12 + l22; }
};

struct AlphaTest {
  double z = 0.0;
  bool reject = false;
  double level = 0.05;
  CofEstimate estimate;
};

/// Correlation of fractional Gaussian noise with H = alpha + 1/2.
double fgn_rho(double alpha, int j);

/// Correlation of second differences of fractional Brownian motion; even in j.
double second_diff_rho(double alpha, int j);

/// 2 + 2 sum_{j>=1} fgn_rho(alpha, j)^2. The series diverges for
/// alpha >= 1/4, so the domain is (-1/2, 1/4).
double lambda2_scalar(double alpha);

/// Truncated at `terms` plus the asymptotic tail; exposed for stability checks.
double lambda2_scalar(double alpha, long terms);

/// Asymptotic covariance of the normalized lag-1 and lag-2 quadratic
/// variations of second differences, alpha in (-1/2, 1/4). Memoized.
Lambda2Matrix lambda2_matrix(double alpha);

/// Series truncated after `terms` terms, no memoization.
Lambda2Matrix lambda2_matrix(double alpha, long terms);

/// Throws LengthError below 5 points, DegenerateError if either variation
/// vanishes. The standard error needs the asymptotic covariance, which costs
/// a series evaluation; skip it with with_std_error = false.
CofEstimate cof_estimate(const SamplePath& path, double p, bool with_std_error = true);

/// Two-sided CLT test of alpha = alpha0. Throws DomainError when alpha_hat
/// leaves (-1/2, 1/4) or p != 2 (the asymptotic covariance is known only for
/// quadratic variation).
AlphaTest test_alpha(const SamplePath& path, double p, double alpha0, double level);

/// Standard normal quantile.
double normal_quantile(double prob);

}  // namespace bss
