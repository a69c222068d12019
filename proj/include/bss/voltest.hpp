#pragma once

#include <map>
#include <optional>
#include <vector>

#include "bss/bridge.hpp"
#include "bss/simulate.hpp"

namespace bss {

struct VolTestResult {
  Metric metric = Metric::L2;
  double statistic = 0.0;
  std::map<double, double> critical_values;
  std::map<double, bool> reject;
  double lambda_p_used = 2.0;
  double alpha_hat_used = 0.0;
  double scale_c = 1.0;
};

struct RrvCi {
  double t = 0.0;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 1.0;
  double level = 0.05;
};

struct VolTestOptions {
  /// Replaces lambda2(alpha_hat); required for p != 2.
  std::optional<double> lambda_p;
  CriticalValueOptions critical{};
  RngSeed seed{};
};

/// v_t(delta) from first-order power variations. Requires 0 < t < T.
double rrv_variance(const SamplePath& path, double p, double t, double lambda_p);

/// Asymptotic confidence interval for the relative accumulated volatility at
/// t, with lambda_p = lambda2(alpha_hat) from the p = 2 change-of-frequency
/// estimate on the same path.
RrvCi rrv_confidence(const SamplePath& path, double p, double t, double level);

/// Grid function delta^{-1/2} (V_t / V_T - t / T) at t = i delta, i = 1..N-1.
std::vector<double> rrv_deviation(const SamplePath& path, double p);

/// Metric of the deviation: L1 = delta sum |f|, L2 = delta sum f^2,
/// Sup = max |f|.
double deviation_statistic(const std::vector<double>& deviation, double step, Metric metric);

/// Test of constant volatility against the scaled Brownian bridge limit.
VolTestResult vol_test(const SamplePath& path, double p, Metric metric,
                       const std::vector<double>& levels, const VolTestOptions& options = {});

}  // namespace bss
