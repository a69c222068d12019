#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bss/rng.hpp"

namespace bss {

enum class Metric { L1, L2, Sup };

std::string to_string(Metric metric);
/// Accepts L1, L2, Sup (case-insensitive). Throws DomainError otherwise.
Metric parse_metric(std::string_view text);

/// CDF of sup |B| for a standard Brownian bridge on [0, 1].
double kolmogorov_cdf(double x);

/// CDF of int_0^1 B(t)^2 dt.
double cramer_von_mises_cdf(double x);

/// Upper-tail quantiles: returns q with P(metric > q) = level.
double kolmogorov_upper_quantile(double level);
double cramer_von_mises_upper_quantile(double level);

/// Functionals of standard Brownian bridges discretized on `grid` steps:
/// L1 = mean |b_i|, L2 = mean b_i^2, Sup = max |b_i| + 0.5826 / sqrt(grid)
/// (boundary-crossing correction for the discrete maximum).
struct BridgeSample {
  std::vector<double> l1;
  std::vector<double> l2;
  std::vector<double> sup;

  const std::vector<double>& of(Metric metric) const;
};

BridgeSample simulate_bridge_functionals(long n_mc, int grid, RngSeed seed);

/// Empirical upper-tail quantile of `values` (sorted in place).
double upper_quantile(std::vector<double>& values, double level);

enum class CriticalValueMode {
  /// Series for Sup and L2, cached Monte Carlo for L1.
  Auto,
  /// Monte Carlo for every metric.
  MonteCarlo
};

struct CriticalValueOptions {
  CriticalValueMode mode = CriticalValueMode::Auto;
  double horizon = 1.0;
  long n_mc = 1'000'000;
  int grid = 10'000;
  /// Consult and extend the on-disk cache (L1 in Auto mode).
  bool use_cache = true;
};

/// Quantiles of the metric applied to c (W(t) - (t/T) W(T)) on [0, T]:
/// level -> critical value. The L1 and L2 metrics integrate over [0, T]; L2
/// is the squared (Cramer-von Mises) form.
std::map<double, double> bridge_critical_values(Metric metric, double scale_c,
                                                const std::vector<double>& levels,
                                                RngSeed seed,
                                                const CriticalValueOptions& options = {});

/// Factor converting a standard-bridge quantile on [0, 1] to the scaled bridge
/// on [0, T].
double bridge_scale_factor(Metric metric, double scale_c, double horizon);

/// One row of the critical-value cache.
struct CachedQuantile {
  Metric metric = Metric::L1;
  double c = 1.0;
  double level = 0.05;
  double quantile = 0.0;
  long n_mc = 0;
  int grid = 0;
  std::uint64_t seed = 0;
};

/// Cache files searched in order: $BSS_CRITVAL_CACHE/bridge_critvals.csv, then
/// the shipped data file. New rows are appended to the first.
std::vector<std::filesystem::path> critical_value_cache_files();

std::vector<CachedQuantile> read_quantile_cache(const std::filesystem::path& file);
void append_quantile_cache(const std::filesystem::path& file,
                           const std::vector<CachedQuantile>& rows);

}  // namespace bss
