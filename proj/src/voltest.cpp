#include "bss/voltest.hpp"

#include <algorithm>
#include <cmath>

#include "bss/errors.hpp"
#include "bss/estimate.hpp"
#include "bss/specfun.hpp"
#include "bss/variation.hpp"

namespace bss {

namespace {

double lambda_for(const SamplePath& path, double p, const std::optional<double>& override_value,
                  double& alpha_hat) {
  alpha_hat = cof_estimate(path, 2.0, false).alpha_hat;
  if (override_value) {
    if (!(*override_value > 0.0)) throw DomainError("lambda_p must be positive");
    return *override_value;
  }
  if (p != 2.0) throw DomainError("lambda_p is only known for p = 2; supply it explicitly");
  return lambda2_scalar(alpha_hat);
}

}  // namespace

double rrv_variance(const SamplePath& path, double p, double t, double lambda_p) {
  validate_path(path, 3);
  const double horizon = path.horizon();
  if (!(t > 0.0 && t < horizon)) throw DomainError("rrv_variance: need 0 < t < T");
  if (!(lambda_p > 0.0)) throw DomainError("rrv_variance: lambda_p must be positive");
  const double vt = first_order_variation(path, p, t).value;
  const double vT = first_order_variation(path, p).value;
  if (!(vT > 0.0)) throw DegenerateError("rrv_variance: path has zero variation");
  const double vt2 = first_order_variation(path, 2.0 * p, t).value;
  const double vT2 = first_order_variation(path, 2.0 * p).value;
  const double ratio = vt / vT;
  const double m2p = specfun::abs_normal_moment(2.0 * p);
  const double inner = (1.0 - ratio) * (1.0 - ratio) * vt2 + ratio * ratio * (vT2 - vt2);
  return lambda_p / (path.step * m2p * vT * vT) * std::max(0.0, inner);
}

RrvCi rrv_confidence(const SamplePath& path, double p, double t, double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("rrv_confidence: level must be in (0, 1)");
  double alpha_hat = 0.0;
  const double lambda_p = lambda_for(path, p, std::nullopt, alpha_hat);
  const double v = rrv_variance(path, p, t, lambda_p);
  const double vt = first_order_variation(path, p, t).value;
  const double vT = first_order_variation(path, p).value;
  RrvCi ci;
  ci.t = t;
  ci.level = level;
  ci.estimate = vt / vT;
  const double half = normal_quantile(1.0 - level / 2.0) * std::sqrt(path.step * v);
  ci.lower = std::clamp(ci.estimate - half, 0.0, 1.0);
  ci.upper = std::clamp(ci.estimate + half, 0.0, 1.0);
  return ci;
}

std::vector<double> rrv_deviation(const SamplePath& path, double p) {
  validate_path(path, 3);
  if (!(p > 0.0)) throw DomainError("rrv_deviation: p must be positive");
  const auto& x = path.values;
  const std::size_t n = path.n_obs();
  std::vector<double> cumulative(n);
  double sum = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    sum += std::pow(std::abs(x[i] - x[i - 1]), p);
    cumulative[i - 1] = sum;
  }
  if (!(sum > 0.0)) throw DegenerateError("vol_test: path has zero variation");
  const double scale = 1.0 / std::sqrt(path.step);
  std::vector<double> f(n - 1);
  for (std::size_t i = 1; i < n; ++i) {
    f[i - 1] = scale * (cumulative[i - 1] / sum - static_cast<double>(i) / n);
  }
  return f;
}

double deviation_statistic(const std::vector<double>& deviation, double step, Metric metric) {
  double out = 0.0;
  switch (metric) {
    case Metric::L1:
      for (double v : deviation) out += std::abs(v);
      return step * out;
    case Metric::L2:
      for (double v : deviation) out += v * v;
      return step * out;
    case Metric::Sup:
      for (double v : deviation) out = std::max(out, std::abs(v));
      return out;
  }
  return out;
}

VolTestResult vol_test(const SamplePath& path, double p, Metric metric,
                       const std::vector<double>& levels, const VolTestOptions& options) {
  if (levels.empty()) throw DomainError("vol_test: no levels given");
  VolTestResult out;
  out.metric = metric;
  out.statistic = deviation_statistic(rrv_deviation(path, p), path.step, metric);
  out.lambda_p_used = lambda_for(path, p, options.lambda_p, out.alpha_hat_used);
  const double horizon = path.horizon();
  out.scale_c = std::sqrt(out.lambda_p_used) / (specfun::abs_normal_moment(p) * horizon);
  CriticalValueOptions critical = options.critical;
  critical.horizon = horizon;
  out.critical_values = bridge_critical_values(metric, out.scale_c, levels, options.seed, critical);
  for (const auto& [a, q] : out.critical_values) out.reject[a] = out.statistic > q;
  return out;
}

}  // namespace bss
