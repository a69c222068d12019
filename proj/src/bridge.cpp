#include "bss/bridge.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <thread>

#include <boost/math/tools/roots.hpp>

#include "bss/errors.hpp"
#include "bss/specfun.hpp"

#ifndef BSS_DATA_DIR
#define BSS_DATA_DIR "data"
#endif

namespace bss {

namespace {

constexpr double kSupCorrection = 0.5826;
constexpr long kChunk = 1024;

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("levels must lie in (0, 1)");
}

template <class Cdf>
double solve_upper(Cdf cdf, double level, double lo, double hi) {
  check_level(level);
  const double target = 1.0 - level;
  auto f = [&](double x) { return cdf(x) - target; };
  while (f(hi) < 0.0) hi *= 2.0;
  while (f(lo) > 0.0) lo *= 0.5;
  boost::uintmax_t iters = 200;
  auto tol = boost::math::tools::eps_tolerance<double>(50);
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, tol, iters);
  return 0.5 * (a + b);
}

}  // namespace

std::string to_string(Metric metric) {
  switch (metric) {
    case Metric::L1: return "L1";
    case Metric::L2: return "L2";
    case Metric::Sup: return "Sup";
  }
  return "?";
}

Metric parse_metric(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "l1") return Metric::L1;
  if (lower == "l2") return Metric::L2;
  if (lower == "sup") return Metric::Sup;
  throw DomainError("unknown metric '" + std::string(text) + "' (expected L1, L2 or Sup)");
}

double kolmogorov_cdf(double x) {
  if (x <= 0.0) return 0.0;
  constexpr double pi = std::numbers::pi;
  double sum = 0.0;
  if (x < 1.18) {
    const double w = pi * pi / (8.0 * x * x);
    for (int k = 1; k < 50; ++k) {
      const double term = std::exp(-(2.0 * k - 1) * (2.0 * k - 1) * w);
      sum += term;
      if (term < 1e-18 * sum) break;
    }
    return std::sqrt(2.0 * pi) / x * sum;
  }
  double sign = 1.0;
  for (int k = 1; k < 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-18) break;
  }
  return 1.0 - 2.0 * sum;
}

double cramer_von_mises_cdf(double x) {
  if (x <= 0.0) return 0.0;
  double coef = 1.0;  // Gamma(j + 1/2) / (Gamma(1/2) j!)
  double sum = 0.0;
  for (int j = 0; j < 200; ++j) {
    if (j > 0) coef *= (2.0 * j - 1.0) / (2.0 * j);
    const double r = 4.0 * j + 1.0;
    const double u = r * r / (16.0 * x);
    if (u > 700.0) break;
    const double term = coef * std::sqrt(r) * std::exp(-u) * specfun::bessel_k(0.25, u);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return std::min(1.0, sum / (std::numbers::pi * std::sqrt(x)));
}

double kolmogorov_upper_quantile(double level) {
  return solve_upper(kolmogorov_cdf, level, 0.3, 3.0);
}

double cramer_von_mises_upper_quantile(double level) {
  return solve_upper(cramer_von_mises_cdf, level, 0.01, 2.0);
}

const std::vector<double>& BridgeSample::of(Metric metric) const {
  switch (metric) {
    case Metric::L1: return l1;
    case Metric::L2: return l2;
    case Metric::Sup: return sup;
  }
  return l1;
}

BridgeSample simulate_bridge_functionals(long n_mc, int grid, RngSeed seed) {
  if (n_mc < 1) throw DomainError("bridge Monte Carlo: n_mc must be positive");
  if (grid < 2) throw DomainError("bridge Monte Carlo: grid must be at least 2");
  BridgeSample out;
  out.l1.resize(n_mc);
  out.l2.resize(n_mc);
  out.sup.resize(n_mc);

  const long chunks = (n_mc + kChunk - 1) / kChunk;
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(grid));
  auto run_chunk = [&](long chunk) {
    NormalSource normals(RngSeed{seed.seed, mix64(seed.stream_id) ^ mix64(chunk + 1)});
    std::vector<double> walk(grid + 1);
    const long end = std::min(n_mc, (chunk + 1) * kChunk);
    for (long r = chunk * kChunk; r < end; ++r) {
      walk[0] = 0.0;
      for (int i = 1; i <= grid; ++i) walk[i] = walk[i - 1] + normals() * inv_sqrt_n;
      const double last = walk[grid];
      double s1 = 0.0, s2 = 0.0, mx = 0.0;
      for (int i = 1; i < grid; ++i) {
        const double b = std::abs(walk[i] - last * i / grid);
        s1 += b;
        s2 += b * b;
        mx = std::max(mx, b);
      }
      out.l1[r] = s1 / grid;
      out.l2[r] = s2 / grid;
      out.sup[r] = mx + kSupCorrection * inv_sqrt_n;
    }
  };

  const long workers = std::max(1L, std::min<long>(std::thread::hardware_concurrency(), chunks));
  if (workers == 1) {
    for (long c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    for (long w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (long c = w; c < chunks; c += workers) run_chunk(c);
      });
    }
    for (auto& t : pool) t.join();
  }
  return out;
}

double upper_quantile(std::vector<double>& values, double level) {
  check_level(level);
  if (values.empty()) throw LengthError("upper_quantile: no values");
  std::sort(values.begin(), values.end());
  // Type-7 quantile at probability 1 - level.
  const double h = (values.size() - 1) * (1.0 - level);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - lo) * (values[hi] - values[lo]);
}

double bridge_scale_factor(Metric metric, double scale_c, double horizon) {
  if (!(scale_c > 0.0)) throw DomainError("bridge scale c must be positive");
  if (!(horizon > 0.0)) throw DomainError("bridge horizon must be positive");
  switch (metric) {
    case Metric::Sup: return scale_c * std::sqrt(horizon);
    case Metric::L1: return scale_c * std::pow(horizon, 1.5);
    case Metric::L2: return scale_c * scale_c * horizon * horizon;
  }
  return 1.0;
}

std::vector<std::filesystem::path> critical_value_cache_files() {
  std::vector<std::filesystem::path> files;
  if (const char* dir = std::getenv("BSS_CRITVAL_CACHE"); dir && *dir) {
    files.emplace_back(std::filesystem::path(dir) / "bridge_critvals.csv");
  }
  files.emplace_back(std::filesystem::path(BSS_DATA_DIR) / "bridge_critvals.csv");
  return files;
}

std::vector<CachedQuantile> read_quantile_cache(const std::filesystem::path& file) {
  std::vector<CachedQuantile> rows;
  std::ifstream in(file);
  if (!in) return rows;
  std::string line;
  std::getline(in, line);
  if (line.rfind("metric,", 0) != 0) throw DataError("bad cache header in " + file.string());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() != 7) throw DataError("bad cache row in " + file.string() + ": " + line);
    try {
      rows.push_back(CachedQuantile{parse_metric(f[0]), std::stod(f[1]), std::stod(f[2]),
                                    std::stod(f[3]), std::stol(f[4]), std::stoi(f[5]),
                                    std::stoull(f[6])});
    } catch (const std::logic_error&) {
      throw DataError("bad cache row in " + file.string() + ": " + line);
    }
  }
  return rows;
}

void append_quantile_cache(const std::filesystem::path& file,
                           const std::vector<CachedQuantile>& rows) {
  std::filesystem::create_directories(file.parent_path());
  const bool fresh = !std::filesystem::exists(file);
  std::ofstream out(file, std::ios::app);
  if (!out) throw DataError("cannot write cache file " + file.string());
  if (fresh) out << "metric,c,level,quantile,n_mc,grid,seed\n";
  for (const auto& r : rows) {
    out << to_string(r.metric) << ',' << std::setprecision(10) << r.c << ',' << r.level << ','
        << std::setprecision(17) << r.quantile << ','
        << r.n_mc << ',' << r.grid << ',' << r.seed << '\n';
  }
}

std::map<double, double> bridge_critical_values(Metric metric, double scale_c,
                                                const std::vector<double>& levels,
                                                RngSeed seed,
                                                const CriticalValueOptions& options) {
  for (double a : levels) check_level(a);
  const double factor = bridge_scale_factor(metric, scale_c, options.horizon);
  std::map<double, double> standard;

  if (options.mode == CriticalValueMode::Auto && metric != Metric::L1) {
    for (double a : levels) {
      standard[a] = metric == Metric::Sup ? kolmogorov_upper_quantile(a)
                                          : cramer_von_mises_upper_quantile(a);
    }
  } else {
    std::vector<double> missing;
    if (options.mode == CriticalValueMode::Auto && options.use_cache) {
      std::vector<CachedQuantile> cached;
      for (const auto& file : critical_value_cache_files()) {
        auto rows = read_quantile_cache(file);
        cached.insert(cached.end(), rows.begin(), rows.end());
      }
      for (double a : levels) {
        const CachedQuantile* best = nullptr;
        for (const auto& row : cached) {
          if (row.metric != metric || row.c != 1.0 || std::abs(row.level - a) > 1e-12) continue;
          if (!best || row.n_mc > best->n_mc || (row.n_mc == best->n_mc && row.grid > best->grid)) {
            best = &row;
          }
        }
        if (best) {
          standard[a] = best->quantile;
        } else {
          missing.push_back(a);
        }
      }
    } else {
      missing = levels;
    }

    if (!missing.empty()) {
      BridgeSample sample = simulate_bridge_functionals(options.n_mc, options.grid, seed);
      std::vector<double> values = sample.of(metric);
      std::vector<CachedQuantile> fresh;
      for (double a : missing) {
        standard[a] = upper_quantile(values, a);
        fresh.push_back({metric, 1.0, a, standard[a], options.n_mc, options.grid, seed.seed});
      }
      if (options.mode == CriticalValueMode::Auto && options.use_cache) {
        const auto files = critical_value_cache_files();
        if (files.size() > 1) append_quantile_cache(files.front(), fresh);
      }
    }
  }

  std::map<double, double> out;
  for (const auto& [a, q] : standard) out[a] = factor * q;
  return out;
}

}  // namespace bss
