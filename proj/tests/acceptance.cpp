// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.
// Desk-scale Monte Carlo: 2000 replications per cell.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "bss/error_terms.hpp"
#include "bss/errors.hpp"
#include "bss/estimate.hpp"
#include "bss/kernel.hpp"
#include "bss/mc_harness.hpp"
#include "bss/rng.hpp"
#include "bss/simulate.hpp"
#include "bss/variation.hpp"
#include "bss/voltest.hpp"

using namespace bss;

namespace {

constexpr int kReps = 2000;
constexpr std::uint64_t kSeed = 20240611;

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

struct Criterion {
  std::string name;
  bool ok = true;
  std::ostringstream detail;

  explicit Criterion(std::string n) : name(std::move(n)) {}

  void expect(bool cond, const std::string& what) {
    ok = ok && cond;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (cond ? "" : " [out of tolerance]");
  }
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string range(double v, double lo, double hi) {
  return fmt("%.4f", v) + " in [" + fmt("%.4f", lo) + ", " + fmt("%.4f", hi) + "]";
}

bool within(Criterion& c, const std::string& label, double v, double lo, double hi) {
  const bool ok = v >= lo && v <= hi;
  c.expect(ok, label + " " + range(v, lo, hi));
  return ok;
}

ExperimentConfig base(ExperimentKind kind, Regime regime) {
  ExperimentConfig c;
  c.kind = kind;
  c.regime = regime;
  c.n_reps = kReps;
  c.base_seed = kSeed;
  c.workers = workers();
  return c;
}

const McSummary& find_row(const std::vector<McSummary>& rows,
                          const std::vector<std::pair<std::string, std::string>>& want) {
  for (const auto& r : rows) {
    bool match = true;
    for (const auto& [k, v] : want) match = match && r.coord(k) == v;
    if (match) return r;
  }
  throw DomainError("acceptance: no matching summary row");
}

void bias_rmse_constant_vol(Criterion& c) {
  auto cfg = base(ExperimentKind::BiasRmse, Regime::A);
  cfg.simulator = SimulatorChoice::Exact;
  cfg.alphas = {0.0};
  cfg.ns = {500};
  auto r = run_experiment(cfg).front();
  within(c, "N=500 a=0 bias", *r.bias, -0.010, 0.004);
  within(c, "rmse", *r.rmse, 0.054, 0.066);
  cfg.alphas = {-0.25};
  cfg.ns = {2000};
  r = run_experiment(cfg).front();
  within(c, "N=2000 a=-0.25 bias", *r.bias, -0.006, 0.004);
  within(c, "rmse", *r.rmse, 0.030, 0.036);
}

void bias_rmse_stochastic_vol(Criterion& c) {
  const struct {
    Regime regime;
    double bias, rmse;
  } cases[] = {{Regime::B, -0.005, 0.069}, {Regime::C, -0.004, 0.068}};
  for (const auto& k : cases) {
    auto cfg = base(ExperimentKind::BiasRmse, k.regime);
    cfg.simulator = SimulatorChoice::Convolution;
    cfg.alphas = {0.0};
    cfg.betas = {5.0};
    cfg.rhos = {-0.5};
    cfg.ns = {500};
    const auto r = run_experiment(cfg).front();
    const std::string tag = "regime " + to_string(k.regime);
    within(c, tag + " bias", *r.bias, k.bias - 0.010, k.bias + 0.010);
    within(c, tag + " rmse", *r.rmse, k.rmse - 0.010, k.rmse + 0.010);
  }
}

void alpha_test_size_power(Criterion& c) {
  auto cfg = base(ExperimentKind::AlphaTest, Regime::A);
  cfg.alphas = {0.0, 0.125};
  cfg.alpha0s = {0.0};
  cfg.ns = {2000};
  cfg.levels = {0.05};
  const auto rows = run_experiment(cfg);
  const auto& size = find_row(rows, {{"alpha", "0"}});
  const auto& power = find_row(rows, {{"alpha", "0.125"}});
  within(c, "size", *size.rejection_rate, 0.049 - 0.015, 0.049 + 0.015);
  within(c, "power a=0.125", *power.rejection_rate, 0.986 - 0.03, 0.986 + 0.03);
}

void vol_test_size(Criterion& c) {
  auto cfg = base(ExperimentKind::VolSize, Regime::A);
  cfg.alphas = {0.0};
  cfg.ns = {50, 2000};
  cfg.levels = {0.05};
  const auto rows = run_experiment(cfg);
  const struct {
    const char* metric;
    double target;
  } sizes[] = {{"L1", 0.050}, {"L2", 0.050}, {"Sup", 0.045}};
  for (const auto& s : sizes) {
    const auto& r = find_row(rows, {{"n", "2000"}, {"metric", s.metric}});
    within(c, std::string(s.metric) + " size N=2000", *r.rejection_rate, s.target - 0.015,
           s.target + 0.015);
  }
  const double sup50 = *find_row(rows, {{"n", "50"}, {"metric", "Sup"}}).rejection_rate;
  const double l2_50 = *find_row(rows, {{"n", "50"}, {"metric", "L2"}}).rejection_rate;
  c.expect(sup50 < l2_50, "N=50 Sup size " + fmt("%.4f", sup50) + " < L2 size " + fmt("%.4f", l2_50));
}

void vol_test_power(Criterion& c) {
  auto cfg = base(ExperimentKind::VolPower, Regime::B);
  cfg.alphas = {-0.125};
  cfg.betas = {0.5};
  cfg.ns = {200};
  cfg.metrics = {Metric::L2};
  cfg.levels = {0.05};
  const auto r = run_experiment(cfg).front();
  within(c, "L2 5% power", *r.rejection_rate, 0.830 - 0.04, 0.830 + 0.04);
}

void infrequent_sampling(Criterion& c) {
  auto cfg = base(ExperimentKind::InfreqSampling, Regime::A);
  cfg.alphas = {0.0};
  cfg.deltas = {1.0};
  cfg.ns = {1000};
  cfg.lambdas = {1.0};
  auto r = run_experiment(cfg).front();
  within(c, "lambda=1 bias", *r.bias, -0.214 - 0.010, -0.214 + 0.010);
  cfg.lambdas = {0.01};
  r = run_experiment(cfg).front();
  within(c, "lambda=0.01 bias", *r.bias, -0.001 - 0.005, -0.001 + 0.005);
}

// Direct Monte Carlo of E[(X(t) - X~(t))^2] with constant volatility: per
// cell of the scheme, the exact pair (int_cell g dW, Delta W) is drawn from
// its bivariate normal law, with cell moments from quadrature.
double mc_scheme_error(const GammaKernelParams& params, int n, int m, int reps, RngSeed seed) {
  const double d = 1.0 / n;
  const int cells = n + m;
  boost::math::quadrature::tanh_sinh<double> ts;
  const auto g = gamma_kernel(params);
  std::vector<double> slope(cells), resid_sd(cells);
  for (int j = 1; j <= cells; ++j) {
    const double a = (j - 1) * d, b = j * d;
    const double i1 = ts.integrate([&](double x) { return g(x); }, a, b);
    const double i2 = ts.integrate([&](double x) { return g(x) * g(x); }, a, b);
    slope[j - 1] = i1 / d - g(b);
    resid_sd[j - 1] = std::sqrt(std::max(0.0, i2 - i1 * i1 / d));
  }
  boost::math::quadrature::exp_sinh<double> es;
  const double tail = es.integrate([&](double x) {
    const double v = g(cells * d + x);
    return v * v;
  });
  NormalSource normals(seed);
  const double sd = std::sqrt(d);
  double sum_sq = 0.0;
  for (int r = 0; r < reps; ++r) {
    double e = std::sqrt(tail) * normals();
    for (int j = 0; j < cells; ++j) e += slope[j] * sd * normals() + resid_sd[j] * normals();
    sum_sq += e * e;
  }
  return sum_sq / reps;
}

void scheme_error(Criterion& c) {
  const ProcessMoments unit;
  const std::vector<int> ns{10, 20, 50, 100, 200, 500, 1000, 2000, 5000};
  // Truncation depth of two time units.
  const auto rough = error_curve(GammaKernelParams(-0.25, 1.0), unit, ns, 1.0, 2.0);
  const auto smooth = error_curve(GammaKernelParams(0.25, 1.0), unit, ns, 1.0, 2.0);
  bool ordered = true, monotone = true;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    ordered = ordered && rough[i].error.mse > smooth[i].error.mse;
    if (i > 0) {
      monotone = monotone && rough[i].error.mse <= rough[i - 1].error.mse &&
                 smooth[i].error.mse <= smooth[i - 1].error.mse;
    }
  }
  c.expect(ordered, "mse(a=-0.25) > mse(a=0.25) at all N");
  c.expect(monotone, "mse nonincreasing in N");
  for (double alpha : {0.25, -0.125}) {
    const GammaKernelParams params(alpha, 1.0);
    const double closed = error_terms(params, unit, SimGrid{200, 1.0, 400, 1}, 200).mse;
    const double mc = mc_scheme_error(params, 200, 400, 50000, {kSeed, 77});
    const double rel = std::abs(mc / closed - 1.0);
    c.expect(rel <= 0.02, "a=" + fmt("%g", alpha) + " closed " + fmt("%.4e", closed) + " vs MC " +
                              fmt("%.4e", mc) + " rel " + fmt("%.4f", rel));
  }
}

void acf_subsampling(Criterion& c) {
  auto cfg = base(ExperimentKind::AcfCheck, Regime::B);
  cfg.alphas = {-0.2};
  cfg.betas = {5.0};
  cfg.ns = {500};
  cfg.truncation = 1000;
  cfg.acf_factors = {1, 100};
  cfg.max_lag = 50;
  const auto rows = run_experiment(cfg);
  int coarse_short_out = 0;
  int fine_in = 0, fine_total = 0;
  for (const auto& r : rows) {
    const int lag = std::stoi(r.coord("lag"));
    if (lag == 0) continue;
    const bool inside = r.value("inside") > 0.5;
    if (r.coord("k") == "1" && lag <= 5 && !inside) ++coarse_short_out;
    if (r.coord("k") == "100") {
      ++fine_total;
      fine_in += inside;
    }
  }
  c.expect(coarse_short_out > 0,
           "k=1 lags 1-5 outside band: " + std::to_string(coarse_short_out) + " of 5");
  const double frac = static_cast<double>(fine_in) / fine_total;
  c.expect(frac >= 0.95, "k=100 inside band at " + fmt("%.2f", frac) + " of lags 1-50 (>= 0.95)");
}

void asymptotic_constants(Criterion& c) {
  c.expect(lambda2_scalar(0.0) == 2.0, "lambda2(0) == 2");
  const Lambda2Matrix m = lambda2_matrix(0.0);
  const double dev =
      std::max({std::abs(m.l11 - 3.0), std::abs(m.l12 - 1.5), std::abs(m.l22 - 3.5)});
  c.expect(dev <= 1e-10, "Lambda2(0) max dev " + fmt("%.1e", dev));
  double rho_dev = std::abs(second_diff_rho(0.0, 0) - 1.0) + 0.0;
  rho_dev = std::max(rho_dev, std::abs(second_diff_rho(0.0, 1) + 0.5));
  for (int j = 2; j <= 200; ++j) rho_dev = std::max(rho_dev, std::abs(second_diff_rho(0.0, j)));
  c.expect(rho_dev <= 1e-12, "rho_diamond(0) max dev " + fmt("%.1e", rho_dev));
  bool psd = true, continuous = true, stable = true;
  double worst_jump = 0.0, worst_trunc = 0.0;
  for (int k = 0; k <= 50; ++k) {
    const double alpha = -0.45 + k * (0.2 + 0.45) / 50.0;
    const Lambda2Matrix a = lambda2_matrix(alpha);
    psd = psd && a.l11 > 0 && a.l22 > 0 && a.l11 * a.l22 - a.l12 * a.l12 >= 0;
    const Lambda2Matrix b = lambda2_matrix(alpha + 1e-7);
    const double jump = std::max(
        {std::abs(a.l11 - b.l11), std::abs(a.l12 - b.l12), std::abs(a.l22 - b.l22)});
    worst_jump = std::max(worst_jump, jump);
    continuous = continuous && jump < 1e-5;
    const Lambda2Matrix j1 = lambda2_matrix(alpha, 4096);
    const Lambda2Matrix j2 = lambda2_matrix(alpha, 8192);
    const double trunc = std::max(
        {std::abs(j1.l11 - j2.l11), std::abs(j1.l12 - j2.l12), std::abs(j1.l22 - j2.l22)});
    worst_trunc = std::max(worst_trunc, trunc);
    stable = stable && trunc <= 1e-8;
    const double s1 = lambda2_scalar(std::min(alpha, 0.24), 4096);
    const double s2 = lambda2_scalar(std::min(alpha, 0.24), 8192);
    stable = stable && std::abs(s1 - s2) <= 1e-8 * s2;
  }
  c.expect(psd, "PSD on 51-point grid");
  c.expect(continuous, "continuity, max jump " + fmt("%.1e", worst_jump) + " per 1e-7");
  c.expect(stable, "J -> 2J max change " + fmt("%.1e", worst_trunc));
}

void invariance(Criterion& c) {
  const SamplePath x =
      simulate_exact_gaussian(GammaKernelParams(-0.1, 1.0), 1.0, SimGrid{1000, 1.0}, {kSeed, 5});
  const CofEstimate e = cof_estimate(x, 2.0);
  const AlphaTest t = test_alpha(x, 2.0, 0.0, 0.05);
  const double vs = vol_test(x, 2.0, Metric::L2, {0.05}).statistic;

  // Scaling by a power of two is exact in floating point.
  SamplePath scaled = x;
  for (double& v : scaled.values) v *= 0.25;
  c.expect(cof_estimate(scaled, 2.0).alpha_hat == e.alpha_hat, "alpha_hat(X/4) bitwise");
  c.expect(test_alpha(scaled, 2.0, 0.0, 0.05).z == t.z, "z(X/4) bitwise");
  c.expect(vol_test(scaled, 2.0, Metric::L2, {0.05}).statistic == vs, "vol stat(X/4) bitwise");

  // General affine maps: equal up to the roundoff of the transformed data.
  SamplePath affine = x;
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    affine.values[i] = 3.7 * x.values[i] + 1.3 - 2.9 * i * x.step;
  }
  const double da = std::abs(cof_estimate(affine, 2.0).alpha_hat - e.alpha_hat);
  const double dz = std::abs(test_alpha(affine, 2.0, 0.0, 0.05).z - t.z);
  c.expect(da <= 1e-12, "alpha_hat(cX+a+bt) dev " + fmt("%.1e", da));
  c.expect(dz <= 1e-10 * std::max(1.0, std::abs(t.z)), "z(cX+a+bt) dev " + fmt("%.1e", dz));
  SamplePath shifted = x;
  for (double& v : shifted.values) v = 3.7 * v + 1.3;
  const double dv = std::abs(vol_test(shifted, 2.0, Metric::L2, {0.05}).statistic - vs);
  c.expect(dv <= 1e-12 * std::max(1.0, vs), "vol stat(cX+a) dev " + fmt("%.1e", dv));

  // Convolution scheme against the O(N M) double loop.
  const int n = 8, m = 16;
  const SimGrid grid{n, 1.0, m, 1};
  const auto g = gamma_kernel(GammaKernelParams(-0.3, 2.0));
  NormalSource normals({kSeed, 6});
  std::vector<double> w(n + m);
  normals.fill(w);
  double worst = 0.0;
  for (auto method : {ConvolutionMethod::Direct, ConvolutionMethod::Fft}) {
    const ConvolutionScheme scheme(g, grid, method);
    const auto got = scheme.convolve(w);
    for (int i = 0; i <= n; ++i) {
      double ref = 0.0;
      for (int k = 1; k <= i + m; ++k) ref += g(k * grid.step()) * w[i + m - k];
      worst = std::max(worst, std::abs(got[i] - ref));
    }
  }
  c.expect(worst <= 1e-10, "brute-force convolution N=8 M=16 max dev " + fmt("%.1e", worst));
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Criterion&)>>> suite{
      {"cof_bias_rmse_constant_vol", bias_rmse_constant_vol},
      {"cof_bias_rmse_stochastic_vol", bias_rmse_stochastic_vol},
      {"alpha_test_size_power", alpha_test_size_power},
      {"vol_test_size", vol_test_size},
      {"vol_test_power_expou", vol_test_power},
      {"infrequent_sampling_bias", infrequent_sampling},
      {"scheme_error_properties", scheme_error},
      {"acf_subsampling", acf_subsampling},
      {"asymptotic_constants", asymptotic_constants},
      {"estimator_invariance", invariance},
  };
  int failures = 0;
  for (const auto& [name, fn] : suite) {
    Criterion c(name);
    const auto start = std::chrono::steady_clock::now();
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s (%.0fs): %s\n", c.ok ? "PASS" : "FAIL", name.c_str(), secs,
                c.detail.str().c_str());
    std::fflush(stdout);
    failures += !c.ok;
  }
  return failures == 0 ? 0 : 1;
}
