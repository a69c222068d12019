#include "bss/variation.hpp"

#include <cmath>
#include <iomanip>
#include <string>

#include "bss/errors.hpp"

namespace bss {

namespace {

double abs_pow(double x, double p) {
  const double a = std::abs(x);
  if (p == 2.0) return a * a;
  if (p == 1.0) return a;
  if (p == 4.0) return (a * a) * (a * a);
  return std::pow(a, p);
}

void check_p(double p) {
  if (!(p > 0.0)) throw DomainError("power variation: p must be positive");
}

int last_index(const SamplePath& path, double t) {
  if (t < 0.0) throw DomainError("power variation: t must be nonnegative");
  const int last = grid_index(t, path.step);
  if (last > static_cast<int>(path.n_obs())) {
    throw DomainError("power variation: t exceeds the path horizon");
  }
  return last;
}

}  // namespace

int grid_index(double t, double step) {
  return static_cast<int>(std::floor(t / step * (1.0 + 1e-12) + 1e-9));
}

std::vector<double> second_diff(const SamplePath& path, int v) {
  if (v < 1) throw DomainError("second_diff: frequency must be at least 1");
  const auto& x = path.values;
  if (x.size() < static_cast<std::size_t>(2 * v + 1)) {
    throw LengthError("second_diff: need at least " + std::to_string(2 * v + 1) + " points");
  }
  std::vector<double> out;
  out.reserve(x.size() - 2 * v);
  for (std::size_t i = 2 * v; i < x.size(); ++i) out.push_back(x[i] - 2.0 * x[i - v] + x[i - 2 * v]);
  return out;
}

PowerVariation power_variation(const SamplePath& path, int v, double p, double t) {
  check_p(p);
  if (v < 1) throw DomainError("power_variation: frequency must be at least 1");
  const int last = last_index(path, t);
  if (last < 2 * v) {
    throw LengthError("power_variation: floor(t/delta) must be at least 2v=" +
                      std::to_string(2 * v));
  }
  const auto& x = path.values;
  double sum = 0.0;
  for (int i = 2 * v; i <= last; ++i) sum += abs_pow(x[i] - 2.0 * x[i - v] + x[i - 2 * v], p);
  return PowerVariation{p, v, sum, last - 2 * v + 1};
}

PowerVariation power_variation(const SamplePath& path, int v, double p) {
  return power_variation(path, v, p, path.horizon());
}

PowerVariation first_order_variation(const SamplePath& path, double p, double t) {
  check_p(p);
  const int last = last_index(path, t);
  if (last < 1) throw LengthError("first_order_variation: floor(t/delta) must be at least 1");
  const auto& x = path.values;
  double sum = 0.0;
  for (int i = 1; i <= last; ++i) sum += abs_pow(x[i] - x[i - 1], p);
  return PowerVariation{p, 0, sum, last};
}

PowerVariation first_order_variation(const SamplePath& path, double p) {
  return first_order_variation(path, p, path.horizon());
}

RrvPath rrv(const SamplePath& path, double p) {
  check_p(p);
  validate_path(path, 2);
  const auto& x = path.values;
  const std::size_t n = path.n_obs();
  std::vector<double> cumulative(n);
  double sum = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    sum += abs_pow(x[i] - x[i - 1], p);
    cumulative[i - 1] = sum;
  }
  if (!(sum > 0.0)) throw DegenerateError("rrv: path has zero variation");
  RrvPath out;
  out.times.resize(n);
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.times[i] = static_cast<double>(i + 1) * path.step;
    out.values[i] = cumulative[i] / sum;
  }
  out.values.back() = 1.0;
  return out;
}

void write_rrv_csv(std::ostream& out, const RrvPath& path) {
  out << "t,rrv\n" << std::setprecision(17);
  for (std::size_t i = 0; i < path.values.size(); ++i) {
    out << path.times[i] << ',' << path.values[i] << '\n';
  }
}

}  // namespace bss
