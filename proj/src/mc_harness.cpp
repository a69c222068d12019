#include "bss/mc_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "bss/error_terms.hpp"
#include "bss/errors.hpp"
#include "bss/estimate.hpp"
#include "bss/kernel.hpp"
#include "bss/simulate.hpp"
#include "bss/voltest.hpp"

namespace bss {

namespace {

using json = nlohmann::json;

constexpr int kBlock = 64;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Runs fn(first, last) over fixed blocks of replications. Block boundaries do
// not depend on the worker count, so results are identical for any count.
template <class Fn>
void for_each_block(int n_reps, int workers, Fn fn) {
  const int blocks = (n_reps + kBlock - 1) / kBlock;
  workers = std::max(1, std::min(workers, blocks));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (int b = next++; b < blocks; b = next++) {
      try {
        fn(b * kBlock, std::min(n_reps, (b + 1) * kBlock));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

// One simulation setting; everything that changes the simulated paths.
struct SimCell {
  Regime regime = Regime::A;
  bool exact = true;
  double alpha = 0.0;
  double lambda = 1.0;
  double beta = 5.0;
  double rho = 0.0;
  int n = 500;
  double horizon = 1.0;
  int k = 1;
  int truncation = 1000;
  double sigma0 = 1.0;

  std::string key() const {
    std::ostringstream os;
    os << to_string(regime) << '|' << (exact ? "exact" : "conv") << "|a=" << fmt(alpha)
       << "|l=" << fmt(lambda) << "|n=" << n << "|T=" << fmt(horizon) << "|s0=" << fmt(sigma0);
    if (!exact) os << "|k=" << k << "|M=" << truncation;
    if (regime != Regime::A) os << "|b=" << fmt(beta);
    if (regime == Regime::C) os << "|r=" << fmt(rho);
    return os.str();
  }

  VolatilitySpec vol() const {
    switch (regime) {
      case Regime::A: return ConstantVol{sigma0};
      case Regime::B: return ExpOuVol{beta, 0.0};
      case Regime::C: return ExpOuVol{beta, rho};
    }
    return ConstantVol{sigma0};
  }

  std::vector<std::pair<std::string, std::string>> coords() const {
    std::vector<std::pair<std::string, std::string>> c{
        {"regime", to_string(regime)}, {"alpha", fmt_short(alpha)}, {"lambda", fmt_short(lambda)}};
    if (regime != Regime::A) c.emplace_back("beta", fmt_short(beta));
    if (regime == Regime::C) c.emplace_back("rho", fmt_short(rho));
    c.emplace_back("n", std::to_string(n));
    c.emplace_back("horizon", fmt_short(horizon));
    c.emplace_back("simulator", exact ? "exact" : "convolution");
    if (!exact) {
      c.emplace_back("k", std::to_string(k));
      c.emplace_back("truncation", std::to_string(truncation));
    }
    return c;
  }
};

// Draws the paths of one cell for a block of replications.
class PathGenerator {
 public:
  explicit PathGenerator(const SimCell& cell) : cell_(cell), key_(cell.key()) {
    const GammaKernelParams params(cell.alpha, cell.lambda);
    if (cell.exact) {
      exact_ = std::make_unique<ExactGaussianSimulator>(params, cell.sigma0, cell.n, cell.horizon);
    } else {
      SimGrid grid{cell.n, cell.horizon, cell.truncation, cell.k};
      conv_ = std::make_unique<ConvolutionScheme>(gamma_kernel(params), grid);
    }
  }

  const std::string& key() const { return key_; }

  RngSeed seed(std::uint64_t base, int rep) const {
    return RngSeed{base, replication_stream(key_, rep)};
  }

  std::vector<SamplePath> generate(std::uint64_t base, int first, int last) const {
    std::vector<RngSeed> seeds;
    for (int r = first; r < last; ++r) seeds.push_back(seed(base, r));
    std::vector<SamplePath> paths;
    if (exact_) {
      const Eigen::MatrixXd batch = exact_->simulate_batch(seeds);
      for (Eigen::Index c = 0; c < batch.cols(); ++c) {
        paths.push_back(SamplePath{exact_->step(), std::vector<double>(batch.col(c).data(),
                                                   batch.col(c).data() + batch.rows())});
      }
    } else {
      const VolatilitySpec vol = cell_.vol();
      for (const auto& s : seeds) paths.push_back(conv_->simulate(vol, s));
    }
    return paths;
  }

 private:
  SimCell cell_;
  std::string key_;
  std::unique_ptr<ExactGaussianSimulator> exact_;
  std::unique_ptr<ConvolutionScheme> conv_;
};

struct Moments {
  int count = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double v) {
    ++count;
    sum += v;
    sum_sq += v * v;
  }
  double mean() const { return count ? sum / count : kNaN; }
  double variance() const {
    if (count < 2) return kNaN;
    const double m = mean();
    return std::max(0.0, (sum_sq - count * m * m) / (count - 1));
  }
};

std::vector<SimCell> sim_cells(const ExperimentConfig& cfg, bool use_deltas) {
  const bool exact = cfg.simulator == SimulatorChoice::Exact ||
                     (cfg.simulator == SimulatorChoice::Auto && cfg.regime == Regime::A);
  const std::vector<double> betas = cfg.regime == Regime::A ? std::vector<double>{0.0} : cfg.betas;
  const std::vector<double> rhos = cfg.regime == Regime::C ? cfg.rhos : std::vector<double>{0.0};
  const std::vector<double>& spans = use_deltas ? cfg.deltas : cfg.horizons;
  std::vector<SimCell> cells;
  for (double a : cfg.alphas)
    for (double l : cfg.lambdas)
      for (double b : betas)
        for (double r : rhos)
          for (int n : cfg.ns)
            for (double s : spans) {
              SimCell c;
              c.regime = cfg.regime;
              c.exact = exact;
              c.alpha = a;
              c.lambda = l;
              c.beta = b;
              c.rho = r;
              c.n = n;
              c.horizon = use_deltas ? s * n : s;
              c.k = cfg.subsample_factor.value_or(a < 0.0 ? 10 : 1);
              c.truncation = cfg.truncation;
              c.sigma0 = cfg.sigma0;
              cells.push_back(c);
            }
  return cells;
}

// Per replication, a vector of outcomes (NaN marks a failed replication).
using Outcome = std::vector<double>;

template <class Eval>
std::vector<Outcome> run_cell(const SimCell& cell, const ExperimentConfig& cfg, Eval eval) {
  const PathGenerator gen(cell);
  std::vector<Outcome> out(cfg.n_reps);
  for_each_block(cfg.n_reps, cfg.workers, [&](int first, int last) {
    const auto paths = gen.generate(cfg.base_seed, first, last);
    for (int r = first; r < last; ++r) out[r] = eval(paths[r - first]);
  });
  return out;
}

McSummary estimate_summary(const SimCell& cell, const std::vector<Outcome>& outcomes,
                           std::size_t slot, double p, bool with_delta) {
  McSummary s;
  s.cell = cell.coords();
  if (with_delta) s.cell.emplace_back("delta", fmt_short(cell.horizon / cell.n));
  s.cell.emplace_back("p", fmt_short(p));
  Moments m;
  Moments err;
  for (const auto& o : outcomes) {
    if (std::isnan(o[slot])) {
      ++s.n_failed;
      continue;
    }
    m.add(o[slot]);
    err.add(o[slot] - cell.alpha);
  }
  s.n_reps_effective = m.count;
  s.mean = m.mean();
  s.bias = err.mean();
  s.rmse = std::sqrt(err.sum_sq / std::max(1, err.count));
  s.mc_stderr = std::sqrt(m.variance() / std::max(1, m.count));
  return s;
}

McSummary rate_summary(std::vector<std::pair<std::string, std::string>> coords,
                       const std::vector<Outcome>& outcomes, std::size_t slot) {
  McSummary s;
  s.cell = std::move(coords);
  int hits = 0;
  for (const auto& o : outcomes) {
    if (std::isnan(o[slot])) {
      ++s.n_failed;
      continue;
    }
    ++s.n_reps_effective;
    hits += o[slot] > 0.5;
  }
  const double n = std::max(1, s.n_reps_effective);
  const double rate = hits / n;
  s.rejection_rate = rate;
  s.mc_stderr = std::sqrt(rate * (1.0 - rate) / n);
  return s;
}

std::vector<McSummary> run_estimation(const ExperimentConfig& cfg, bool infreq) {
  std::vector<McSummary> rows;
  for (const SimCell& cell : sim_cells(cfg, infreq)) {
    const auto outcomes = run_cell(cell, cfg, [&](const SamplePath& path) {
      Outcome o;
      for (double p : cfg.ps) {
        try {
          o.push_back(cof_estimate(path, p, false).alpha_hat);
        } catch (const std::runtime_error&) {
          o.push_back(kNaN);
        }
      }
      return o;
    });
    for (std::size_t i = 0; i < cfg.ps.size(); ++i) {
      rows.push_back(estimate_summary(cell, outcomes, i, cfg.ps[i], infreq));
    }
  }
  return rows;
}

std::vector<McSummary> run_alpha_test(const ExperimentConfig& cfg) {
  std::vector<McSummary> rows;
  for (const SimCell& cell : sim_cells(cfg, false)) {
    std::vector<double> crit;
    for (double level : cfg.levels) crit.push_back(normal_quantile(1.0 - level / 2.0));
    const auto outcomes = run_cell(cell, cfg, [&](const SamplePath& path) {
      Outcome o;
      try {
        const CofEstimate est = cof_estimate(path, 2.0);
        if (!est.std_error) throw DomainError("outside the CLT region");
        for (double a0 : cfg.alpha0s) {
          const double z = est.z_stat_vs(a0);
          for (double q : crit) o.push_back(std::abs(z) > q ? 1.0 : 0.0);
        }
      } catch (const std::exception&) {
        o.assign(cfg.alpha0s.size() * crit.size(), kNaN);
      }
      return o;
    });
    std::size_t slot = 0;
    for (double a0 : cfg.alpha0s) {
      for (double level : cfg.levels) {
        auto coords = cell.coords();
        coords.emplace_back("alpha0", fmt_short(a0));
        coords.emplace_back("level", fmt_short(level));
        rows.push_back(rate_summary(std::move(coords), outcomes, slot++));
      }
    }
  }
  return rows;
}

std::vector<McSummary> run_vol(const ExperimentConfig& cfg) {
  std::vector<McSummary> rows;
  for (const SimCell& cell : sim_cells(cfg, false)) {
    const auto outcomes = run_cell(cell, cfg, [&](const SamplePath& path) {
      Outcome o;
      for (Metric metric : cfg.metrics) {
        try {
          const VolTestResult res = vol_test(path, 2.0, metric, cfg.levels);
          for (double level : cfg.levels) o.push_back(res.reject.at(level) ? 1.0 : 0.0);
        } catch (const std::exception&) {
          o.insert(o.end(), cfg.levels.size(), kNaN);
        }
      }
      return o;
    });
    std::size_t slot = 0;
    for (Metric metric : cfg.metrics) {
      for (double level : cfg.levels) {
        auto coords = cell.coords();
        coords.emplace_back("metric", to_string(metric));
        coords.emplace_back("level", fmt_short(level));
        rows.push_back(rate_summary(std::move(coords), outcomes, slot++));
      }
    }
  }
  return rows;
}

// Known-mean autocovariances gamma(h), h = 0..max_lag, of one path.
Outcome path_autocovariance(const SamplePath& path, int max_lag) {
  const auto& x = path.values;
  const int size = static_cast<int>(x.size());
  Outcome o(max_lag + 1);
  for (int h = 0; h <= max_lag; ++h) {
    double s = 0.0;
    for (int i = 0; i + h < size; ++i) s += x[i] * x[i + h];
    o[h] = s / (size - h);
  }
  return o;
}

std::vector<McSummary> run_acf(const ExperimentConfig& cfg) {
  std::vector<McSummary> rows;
  ExperimentConfig local = cfg;
  local.simulator = SimulatorChoice::Convolution;
  for (int k : cfg.acf_factors) {
    local.subsample_factor = k;
    for (const SimCell& cell : sim_cells(local, false)) {
      if (cfg.max_lag >= cell.n) throw DomainError("acf_check: max_lag must be below n");
      const auto outcomes = run_cell(cell, local, [&](const SamplePath& path) {
        return path_autocovariance(path, cfg.max_lag);
      });
      const GammaKernelParams params(cell.alpha, cell.lambda);
      const double step = cell.horizon / cell.n;
      const double reps = static_cast<double>(outcomes.size());
      double mean0 = 0.0;
      for (const auto& o : outcomes) mean0 += o[0];
      mean0 /= reps;
      for (int h = 0; h <= cfg.max_lag; ++h) {
        // Ratio of mean autocovariances; its delta-method standard error
        // comes from the residuals gamma_r(h) - rho gamma_r(0).
        double mean_h = 0.0;
        for (const auto& o : outcomes) mean_h += o[h];
        mean_h /= reps;
        const double rho_bar = mean_h / mean0;
        Moments resid;
        Moments per_path;
        for (const auto& o : outcomes) {
          resid.add(o[h] - rho_bar * o[0]);
          per_path.add(o[h] / o[0]);
        }
        const double se = std::sqrt(resid.variance() / reps) / mean0;
        const double theory = matern_rho(params, h * step);
        McSummary s;
        s.cell = cell.coords();
        s.cell.emplace_back("lag", std::to_string(h));
        s.mean = rho_bar;
        s.mc_stderr = se;
        s.n_reps_effective = static_cast<int>(reps);
        s.extra = {{"theoretical", theory},
                   {"lower", rho_bar - 1.96 * se},
                   {"upper", rho_bar + 1.96 * se},
                   {"inside", std::abs(rho_bar - theory) <= 1.96 * se ? 1.0 : 0.0},
                   {"mean_path_acf", per_path.mean()}};
        rows.push_back(std::move(s));
      }
    }
  }
  return rows;
}

std::vector<McSummary> run_error_curve(const ExperimentConfig& cfg) {
  std::vector<McSummary> rows;
  ProcessMoments moments;
  moments.mean_sigma_sq = cfg.sigma0 * cfg.sigma0;
  for (double a : cfg.alphas) {
    for (double l : cfg.lambdas) {
      for (double beta : cfg.regime == Regime::A ? std::vector<double>{0.0} : cfg.betas) {
        // E[exp(2Y)] for Y ~ N(0, 1/(2 beta)).
        if (cfg.regime != Regime::A) moments.mean_sigma_sq = std::exp(1.0 / beta);
        const auto curve = error_curve(GammaKernelParams(a, l), moments, cfg.ns, cfg.error_t,
                                       cfg.error_depth);
        for (const auto& row : curve) {
          McSummary s;
          s.cell = {{"regime", to_string(cfg.regime)},
                    {"alpha", fmt_short(a)},
                    {"lambda", fmt_short(l)}};
          if (cfg.regime != Regime::A) s.cell.emplace_back("beta", fmt_short(beta));
          s.cell.emplace_back("n", std::to_string(row.n));
          s.extra = {{"c1", row.error.c1},
                     {"c2", row.error.c2},
                     {"c3", row.error.c3},
                     {"mse", row.error.mse},
                     {"rmse", row.error.rmse}};
          rows.push_back(std::move(s));
        }
      }
    }
  }
  return rows;
}

template <class T>
std::vector<T> read_list(const json& value) {
  if (value.is_array()) return value.get<std::vector<T>>();
  return {value.get<T>()};
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::BiasRmse: return "bias_rmse";
    case ExperimentKind::AlphaTest: return "alpha_test";
    case ExperimentKind::VolSize: return "vol_size";
    case ExperimentKind::VolPower: return "vol_power";
    case ExperimentKind::PStudy: return "p_study";
    case ExperimentKind::AcfCheck: return "acf_check";
    case ExperimentKind::InfreqSampling: return "infreq_sampling";
    case ExperimentKind::ErrorCurve: return "error_curve";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(const std::string& text) {
  for (auto k : {ExperimentKind::BiasRmse, ExperimentKind::AlphaTest, ExperimentKind::VolSize,
                 ExperimentKind::VolPower, ExperimentKind::PStudy, ExperimentKind::AcfCheck,
                 ExperimentKind::InfreqSampling, ExperimentKind::ErrorCurve}) {
    if (to_string(k) == text) return k;
  }
  throw DomainError("unknown experiment kind '" + text + "'");
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::A: return "A";
    case Regime::B: return "B";
    case Regime::C: return "C";
  }
  return "?";
}

Regime parse_regime(const std::string& text) {
  if (text == "A" || text == "A_constant") return Regime::A;
  if (text == "B" || text == "B_stochvol") return Regime::B;
  if (text == "C" || text == "C_leverage") return Regime::C;
  throw DomainError("unknown regime '" + text + "'");
}

void ExperimentConfig::validate() const {
  auto nonempty = [](bool empty, const char* name) {
    if (empty) throw DomainError(std::string("experiment grid '") + name + "' is empty");
  };
  nonempty(alphas.empty(), "alpha");
  nonempty(lambdas.empty(), "lambda");
  nonempty(ns.empty(), "n");
  nonempty(ps.empty(), "p");
  nonempty(levels.empty(), "levels");
  nonempty(horizons.empty(), "horizon");
  nonempty(deltas.empty(), "delta");
  if (regime != Regime::A) nonempty(betas.empty(), "beta");
  if (regime == Regime::C) nonempty(rhos.empty(), "rho");
  if (kind == ExperimentKind::AlphaTest) nonempty(alpha0s.empty(), "alpha0");
  if (kind == ExperimentKind::VolSize || kind == ExperimentKind::VolPower) {
    nonempty(metrics.empty(), "metrics");
  }
  if (kind == ExperimentKind::AcfCheck) nonempty(acf_factors.empty(), "acf_factors");
  if (n_reps < 1) throw DomainError("n_reps must be at least 1");
  if (workers < 1) throw DomainError("workers must be at least 1");
  if (truncation < 1) throw DomainError("truncation must be at least 1");
  if (subsample_factor && *subsample_factor < 1) throw DomainError("subsample_factor must be >= 1");
  for (double a : alphas) GammaKernelParams(a, 1.0);
  for (double l : lambdas) GammaKernelParams(0.0, l);
  for (int n : ns) {
    if (n < 5) throw DomainError("n must be at least 5");
  }
  for (double l : levels) {
    if (!(l > 0.0 && l < 1.0)) throw DomainError("levels must lie in (0, 1)");
  }
  for (double p : ps) {
    if (!(p > 0.0)) throw DomainError("p must be positive");
  }
  for (double b : betas) {
    if (regime != Regime::A && !(b > 0.0)) throw DomainError("beta must be positive");
  }
  for (double r : rhos) {
    if (regime == Regime::C && !(r >= -1.0 && r <= 1.0)) throw DomainError("rho must be in [-1, 1]");
  }
  for (double h : horizons) {
    if (!(h > 0.0)) throw DomainError("horizon must be positive");
  }
  for (double d : deltas) {
    if (!(d > 0.0)) throw DomainError("delta must be positive");
  }
  if (simulator == SimulatorChoice::Exact && regime != Regime::A) {
    throw DomainError("the exact simulator only covers constant volatility (regime A)");
  }
  if (kind == ExperimentKind::AcfCheck && max_lag < 1) throw DomainError("max_lag must be >= 1");
  if (kind == ExperimentKind::ErrorCurve && !(error_t > 0.0 && error_t <= 1.0)) {
    throw DomainError("error_t must lie in (0, 1]");
  }
  if (kind == ExperimentKind::ErrorCurve && !(error_depth > 0.0)) {
    throw DomainError("error_depth must be positive");
  }
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("experiment config: ") + e.what());
  }
  if (!j.is_object()) throw DataError("experiment config must be a JSON object");
  ExperimentConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "kind") c.kind = parse_experiment_kind(value.get<std::string>());
      else if (key == "regime") c.regime = parse_regime(value.get<std::string>());
      else if (key == "alpha") c.alphas = read_list<double>(value);
      else if (key == "lambda") c.lambdas = read_list<double>(value);
      else if (key == "beta") c.betas = read_list<double>(value);
      else if (key == "rho") c.rhos = read_list<double>(value);
      else if (key == "n") c.ns = read_list<int>(value);
      else if (key == "horizon") c.horizons = read_list<double>(value);
      else if (key == "delta") c.deltas = read_list<double>(value);
      else if (key == "p") c.ps = read_list<double>(value);
      else if (key == "alpha0") c.alpha0s = read_list<double>(value);
      else if (key == "levels") c.levels = read_list<double>(value);
      else if (key == "acf_factors") c.acf_factors = read_list<int>(value);
      else if (key == "metrics") {
        c.metrics.clear();
        for (const auto& m : read_list<std::string>(value)) c.metrics.push_back(parse_metric(m));
      } else if (key == "n_reps") c.n_reps = value.get<int>();
      else if (key == "seed") c.base_seed = value.get<std::uint64_t>();
      else if (key == "subsample_factor") {
        if (!value.is_null()) c.subsample_factor = value.get<int>();
      } else if (key == "truncation") c.truncation = value.get<int>();
      else if (key == "simulator") {
        const auto s = value.get<std::string>();
        if (s == "auto") c.simulator = SimulatorChoice::Auto;
        else if (s == "exact") c.simulator = SimulatorChoice::Exact;
        else if (s == "convolution") c.simulator = SimulatorChoice::Convolution;
        else throw DomainError("unknown simulator '" + s + "'");
      } else if (key == "sigma0") c.sigma0 = value.get<double>();
      else if (key == "max_lag") c.max_lag = value.get<int>();
      else if (key == "error_t") c.error_t = value.get<double>();
      else if (key == "error_depth") c.error_depth = value.get<double>();
      else if (key == "workers") c.workers = value.get<int>();
      else throw DataError("experiment config: unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("experiment config: ") + e.what());
  }
  if (!j.contains("regime")) {
    if (c.kind == ExperimentKind::VolPower) c.regime = Regime::B;
  }
  c.validate();
  return c;
}

std::string experiment_config_json(const ExperimentConfig& c) {
  json j;
  j["kind"] = to_string(c.kind);
  j["regime"] = to_string(c.regime);
  j["alpha"] = c.alphas;
  j["lambda"] = c.lambdas;
  j["beta"] = c.betas;
  j["rho"] = c.rhos;
  j["n"] = c.ns;
  j["horizon"] = c.horizons;
  j["delta"] = c.deltas;
  j["p"] = c.ps;
  j["alpha0"] = c.alpha0s;
  std::vector<std::string> metrics;
  for (Metric m : c.metrics) metrics.push_back(to_string(m));
  j["metrics"] = metrics;
  j["levels"] = c.levels;
  j["acf_factors"] = c.acf_factors;
  j["n_reps"] = c.n_reps;
  j["seed"] = c.base_seed;
  j["subsample_factor"] = c.subsample_factor ? json(*c.subsample_factor) : json(nullptr);
  j["truncation"] = c.truncation;
  j["simulator"] = c.simulator == SimulatorChoice::Auto    ? "auto"
                   : c.simulator == SimulatorChoice::Exact ? "exact"
                                                           : "convolution";
  j["sigma0"] = c.sigma0;
  j["max_lag"] = c.max_lag;
  j["error_t"] = c.error_t;
  j["error_depth"] = c.error_depth;
  return j.dump(2);
}

const std::string& McSummary::coord(const std::string& name) const {
  for (const auto& [k, v] : cell) {
    if (k == name) return v;
  }
  throw DomainError("summary has no coordinate '" + name + "'");
}

double McSummary::value(const std::string& name) const {
  if (name == "mean" && mean) return *mean;
  if (name == "bias" && bias) return *bias;
  if (name == "rmse" && rmse) return *rmse;
  if (name == "rejection_rate" && rejection_rate) return *rejection_rate;
  if (name == "mc_stderr") return mc_stderr;
  for (const auto& [k, v] : extra) {
    if (k == name) return v;
  }
  throw DomainError("summary has no value '" + name + "'");
}

std::vector<McSummary> run_experiment(const ExperimentConfig& config) {
  config.validate();
  switch (config.kind) {
    case ExperimentKind::BiasRmse:
    case ExperimentKind::PStudy: return run_estimation(config, false);
    case ExperimentKind::InfreqSampling: return run_estimation(config, true);
    case ExperimentKind::AlphaTest: return run_alpha_test(config);
    case ExperimentKind::VolSize:
    case ExperimentKind::VolPower: return run_vol(config);
    case ExperimentKind::AcfCheck: return run_acf(config);
    case ExperimentKind::ErrorCurve: return run_error_curve(config);
  }
  return {};
}

void write_summary_csv(std::ostream& out, const std::vector<McSummary>& rows) {
  std::vector<std::string> coord_cols;
  std::vector<std::string> extra_cols;
  bool has_mean = false, has_bias = false, has_rmse = false, has_rate = false;
  auto add_unique = [](std::vector<std::string>& cols, const std::string& name) {
    if (std::find(cols.begin(), cols.end(), name) == cols.end()) cols.push_back(name);
  };
  for (const auto& r : rows) {
    for (const auto& kv : r.cell) add_unique(coord_cols, kv.first);
    for (const auto& kv : r.extra) add_unique(extra_cols, kv.first);
    has_mean |= r.mean.has_value();
    has_bias |= r.bias.has_value();
    has_rmse |= r.rmse.has_value();
    has_rate |= r.rejection_rate.has_value();
  }
  std::vector<std::string> header = coord_cols;
  if (has_mean) header.push_back("mean");
  if (has_bias) header.push_back("bias");
  if (has_rmse) header.push_back("rmse");
  if (has_rate) header.push_back("rejection_rate");
  header.insert(header.end(), {"mc_stderr", "n_reps_effective", "n_failed"});
  header.insert(header.end(), extra_cols.begin(), extra_cols.end());
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';

  auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  for (const auto& r : rows) {
    std::vector<std::string> fields;
    for (const auto& col : coord_cols) {
      std::string v;
      for (const auto& [k, val] : r.cell) {
        if (k == col) v = val;
      }
      fields.push_back(v);
    }
    if (has_mean) fields.push_back(opt(r.mean));
    if (has_bias) fields.push_back(opt(r.bias));
    if (has_rmse) fields.push_back(opt(r.rmse));
    if (has_rate) fields.push_back(opt(r.rejection_rate));
    fields.push_back(fmt(r.mc_stderr));
    fields.push_back(std::to_string(r.n_reps_effective));
    fields.push_back(std::to_string(r.n_failed));
    for (const auto& col : extra_cols) {
      std::string v;
      for (const auto& [k, val] : r.extra) {
        if (k == col) v = fmt(val);
      }
      fields.push_back(v);
    }
    for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << fields[i];
    out << '\n';
  }
}

std::string summary_file_name(const ExperimentConfig& config) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(stable_hash(experiment_config_json(config))));
  return to_string(config.kind) + "_" + buf + ".csv";
}

std::uint64_t replication_stream(const std::string& cell_key, int rep) {
  return mix64(stable_hash(cell_key) ^ mix64(static_cast<std::uint64_t>(rep) + 1));
}

std::vector<NegBiasPoint> negbias_curve(double alpha, int n_max, int n_reps, RngSeed seed,
                                        double lambda, int workers) {
  if (n_max < 20) throw DomainError("negbias_curve: n_max must be at least 20");
  if (n_reps < 1) throw DomainError("negbias_curve: n_reps must be at least 1");
  SimCell cell;
  cell.alpha = alpha;
  cell.lambda = lambda;
  cell.n = n_max;
  const PathGenerator gen(cell);
  const int points = n_max / 10;
  std::vector<Outcome> outcomes(n_reps);
  for_each_block(n_reps, workers, [&](int first, int last) {
    const auto paths = gen.generate(seed.seed ^ seed.stream_id, first, last);
    for (int r = first; r < last; ++r) {
      const SamplePath& full = paths[r - first];
      Outcome o(points);
      for (int q = 0; q < points; ++q) {
        const int n = 10 * (q + 1);
        SamplePath prefix{full.step, std::vector<double>(full.values.begin(),
                                                         full.values.begin() + n + 1)};
        try {
          o[q] = cof_estimate(prefix, 2.0, false).alpha_hat;
        } catch (const std::runtime_error&) {
          o[q] = kNaN;
        }
      }
      outcomes[r] = std::move(o);
    }
  });
  std::vector<NegBiasPoint> curve;
  for (int q = 0; q < points; ++q) {
    Moments m;
    for (const auto& o : outcomes) {
      if (!std::isnan(o[q])) m.add(o[q]);
    }
    curve.push_back({10 * (q + 1), m.mean(), m.count});
  }
  return curve;
}

}  // namespace bss
