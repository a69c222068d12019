#include "bss/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bss/bridge.hpp"
#include "bss/error_terms.hpp"
#include "bss/errors.hpp"
#include "bss/estimate.hpp"
#include "bss/mc_harness.hpp"
#include "bss/path_io.hpp"
#include "bss/simulate.hpp"
#include "bss/voltest.hpp"

namespace bss {

namespace {

using json = nlohmann::json;

// Flag combinations that parse but make no sense.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses constant:<sigma0> or expou:<beta>[:<rho>].
VolatilitySpec parse_vol(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  try {
    if (!parts.empty() && parts[0] == "constant") {
      if (parts.size() > 2) throw UsageError("");
      return ConstantVol{parts.size() == 2 ? std::stod(parts[1]) : 1.0};
    }
    if (!parts.empty() && parts[0] == "expou" && (parts.size() == 2 || parts.size() == 3)) {
      return ExpOuVol{std::stod(parts[1]), parts.size() == 3 ? std::stod(parts[2]) : 0.0};
    }
  } catch (const std::logic_error&) {
  }
  throw UsageError("--vol expects constant[:sigma0] or expou:beta[:rho], got '" + text + "'");
}

// Runs flag validation; domain errors there are usage errors.
template <class F>
auto usage_check(F f) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

std::vector<double> parse_levels(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::logic_error&) {
      throw UsageError("cannot parse level '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError("no levels given");
  return out;
}

// Writes to --out when given, else to the dispatcher's stream.
class Sink {
 public:
  Sink(const std::string& file, std::ostream& fallback) {
    if (!file.empty()) {
      file_.open(file);
      if (!file_) throw DataError("cannot write " + file);
    }
    stream_ = file.empty() ? &fallback : &file_;
  }
  std::ostream& stream() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

json estimate_json(const CofEstimate& e) {
  json j;
  j["alpha_hat"] = e.alpha_hat;
  j["stderr"] = e.std_error ? json(*e.std_error) : json(nullptr);
  j["cof_value"] = e.cof_value;
  j["p"] = e.p;
  j["n_used"] = e.n_used;
  return j;
}

json vol_json(const VolTestResult& r, double p) {
  json j;
  j["metric"] = to_string(r.metric);
  j["statistic"] = r.statistic;
  j["statistic_convention"] =
      r.metric == Metric::L2 ? "delta*sum(f^2) (squared, Cramer-von Mises form)"
      : r.metric == Metric::L1 ? "delta*sum(|f|)"
                               : "max(|f|)";
  json cv = json::array();
  for (const auto& [level, q] : r.critical_values) {
    cv.push_back({{"level", level}, {"critical_value", q}, {"reject", r.reject.at(level)}});
  }
  j["critical_values"] = cv;
  j["lambda_p_used"] = r.lambda_p_used;
  j["alpha_hat_used"] = r.alpha_hat_used;
  j["scale_c"] = r.scale_c;
  j["p"] = p;
  return j;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and inference for Brownian semistationary processes", "bss"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  // simulate
  struct {
    double alpha = 0, lambda = 1, horizon = 1;
    int n = 0, truncation = 1000, k = 1;
    std::string vol = "constant:1", method = "auto", out;
    std::uint64_t seed = 0;
  } sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate a path; writes CSV t,x");
  simulate->add_option("--alpha", sim.alpha, "Kernel exponent alpha > -1/2")->required();
  simulate->add_option("--lambda", sim.lambda, "Kernel decay lambda > 0")->required();
  simulate->add_option("--n", sim.n, "Number of steps N")->required();
  simulate->add_option("--t", sim.horizon, "Horizon T");
  simulate->add_option("--vol", sim.vol, "constant[:sigma0] | expou:beta[:rho]");
  simulate->add_option("--method", sim.method, "auto | exact | convolution")
      ->check(CLI::IsMember({"auto", "exact", "convolution"}));
  simulate->add_option("--truncation", sim.truncation, "Truncation depth M in steps");
  simulate->add_option("--k", sim.k, "Subsampling factor for the convolution scheme");
  simulate->add_option("--seed", sim.seed, "Random seed")->required();
  simulate->add_option("--out", sim.out, "Output CSV (default stdout)");

  // acf-check
  struct {
    double alpha = -0.2, lambda = 1, horizon = 1;
    int n = 500, truncation = 1000, reps = 400, max_lag = 50, workers = 1;
    std::vector<int> factors{1, 100};
    std::string vol = "expou:5", out;
    std::uint64_t seed = 0;
  } acf;
  auto* acf_cmd = app.add_subcommand("acf-check", "Empirical vs theoretical ACF; writes CSV");
  acf_cmd->add_option("--alpha", acf.alpha);
  acf_cmd->add_option("--lambda", acf.lambda);
  acf_cmd->add_option("--n", acf.n);
  acf_cmd->add_option("--t", acf.horizon);
  acf_cmd->add_option("--vol", acf.vol);
  acf_cmd->add_option("--k", acf.factors, "Subsampling factors to compare")->delimiter(',');
  acf_cmd->add_option("--truncation", acf.truncation);
  acf_cmd->add_option("--reps", acf.reps);
  acf_cmd->add_option("--max-lag", acf.max_lag);
  acf_cmd->add_option("--workers", acf.workers);
  acf_cmd->add_option("--seed", acf.seed)->required();
  acf_cmd->add_option("--out", acf.out);

  // error-curve
  struct {
    std::vector<double> alphas{-0.25, 0.25};
    double lambda = 1, t = 1, depth = 2, mean_sigma_sq = 1;
    std::vector<int> ns{10, 20, 50, 100, 200, 500, 1000};
    std::string form = "exact", out;
  } ec;
  auto* ec_cmd = app.add_subcommand("error-curve", "Closed-form L2 scheme error; writes CSV");
  ec_cmd->add_option("--alpha", ec.alphas)->delimiter(',');
  ec_cmd->add_option("--lambda", ec.lambda);
  ec_cmd->add_option("--n", ec.ns, "Comma-separated N values")->delimiter(',');
  ec_cmd->add_option("--t-eval", ec.t, "Evaluation time in (0, 1]");
  ec_cmd->add_option("--depth", ec.depth, "Truncation depth in time units");
  ec_cmd->add_option("--mean-sigma-sq", ec.mean_sigma_sq, "E[sigma^2]");
  ec_cmd->add_option("--form", ec.form, "exact | printed")
      ->check(CLI::IsMember({"exact", "printed"}));
  ec_cmd->add_option("--out", ec.out);

  // estimate-alpha / test-alpha / test-vol
  struct {
    std::string in, out;
    double p = 2, alpha0 = 0, level = 0.05;
    std::string metric = "L2", levels = "0.01,0.05,0.10";
    std::optional<double> lambda_p;
    std::uint64_t seed = 0;
  } inf;
  auto* est_cmd = app.add_subcommand("estimate-alpha", "Change-of-frequency estimate; JSON");
  est_cmd->add_option("--in", inf.in, "Path CSV t,x")->required();
  est_cmd->add_option("--p", inf.p);
  est_cmd->add_option("--out", inf.out);

  auto* ta_cmd = app.add_subcommand("test-alpha", "Test alpha = alpha0; JSON");
  ta_cmd->add_option("--in", inf.in)->required();
  ta_cmd->add_option("--alpha0", inf.alpha0)->required();
  ta_cmd->add_option("--level", inf.level);
  ta_cmd->add_option("--p", inf.p);
  ta_cmd->add_option("--out", inf.out);

  auto* tv_cmd = app.add_subcommand("test-vol", "Test of constant volatility; JSON");
  tv_cmd->add_option("--in", inf.in)->required();
  tv_cmd->add_option("--metric", inf.metric, "L1 | L2 | Sup");
  tv_cmd->add_option("--levels", inf.levels, "Comma-separated levels");
  tv_cmd->add_option("--p", inf.p);
  tv_cmd->add_option("--lambda-p", inf.lambda_p, "Override lambda_p (required for p != 2)");
  tv_cmd->add_option("--seed", inf.seed,
                     "Seed for Monte Carlo critical values when no cached value exists");
  tv_cmd->add_option("--out", inf.out);

  // mc
  struct {
    std::string config, out;
    int workers = 1;
    std::optional<int> reps;
    std::optional<std::uint64_t> seed;
  } mc;
  auto* mc_cmd = app.add_subcommand("mc", "Run a Monte Carlo experiment from a JSON config");
  mc_cmd->add_option("--config", mc.config, "Experiment JSON")->required()->check(CLI::ExistingFile);
  mc_cmd->add_option("--workers", mc.workers);
  mc_cmd->add_option("--reps", mc.reps, "Override n_reps");
  mc_cmd->add_option("--seed", mc.seed, "Override the config seed");
  mc_cmd->add_option("--out", mc.out,
                     "Output CSV file, or a directory to receive a config-named file");

  // critvals
  struct {
    std::string metric = "L2", levels = "0.01,0.05,0.10", mode = "auto", out;
    double c = 1, horizon = 1;
    long n_mc = 1'000'000;
    int grid = 10'000;
    std::uint64_t seed = 0;
    bool seed_given = false;
  } cv;
  auto* cv_cmd = app.add_subcommand("critvals", "Scaled Brownian bridge critical values; CSV");
  cv_cmd->add_option("--metric", cv.metric);
  cv_cmd->add_option("--c", cv.c, "Bridge scale c > 0");
  cv_cmd->add_option("--horizon", cv.horizon);
  cv_cmd->add_option("--levels", cv.levels);
  cv_cmd->add_option("--mode", cv.mode, "auto | mc")->check(CLI::IsMember({"auto", "mc"}));
  cv_cmd->add_option("--n-mc", cv.n_mc);
  cv_cmd->add_option("--grid", cv.grid);
  auto* cv_seed = cv_cmd->add_option("--seed", cv.seed);
  cv_cmd->add_option("--out", cv.out);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*simulate) {
      const VolatilitySpec vol = parse_vol(sim.vol);
      const bool constant = std::holds_alternative<ConstantVol>(vol);
      if (sim.method == "exact" && !constant) {
        throw UsageError("the exact method needs constant volatility");
      }
      const SimGrid grid{sim.n, sim.horizon, sim.truncation, sim.k};
      const GammaKernelParams params = usage_check([&] {
        grid.validate();
        validate(vol);
        return GammaKernelParams(sim.alpha, sim.lambda);
      });
      SamplePath path;
      const RngSeed seed{sim.seed, 0};
      if (sim.method == "exact" || (sim.method == "auto" && constant)) {
        path = simulate_exact_gaussian(params, std::get<ConstantVol>(vol).sigma0, grid, seed);
      } else {
        path = simulate_convolution(params, vol, grid, seed);
      }
      Sink sink(sim.out, out);
      write_path_csv(sink.stream(), path);
    } else if (*acf_cmd) {
      ExperimentConfig cfg;
      cfg.kind = ExperimentKind::AcfCheck;
      const VolatilitySpec vol = parse_vol(acf.vol);
      if (const auto* ou = std::get_if<ExpOuVol>(&vol)) {
        cfg.regime = ou->leverage_rho != 0.0 ? Regime::C : Regime::B;
        cfg.betas = {ou->beta};
        cfg.rhos = {ou->leverage_rho};
      } else {
        cfg.regime = Regime::A;
        cfg.sigma0 = std::get<ConstantVol>(vol).sigma0;
      }
      cfg.alphas = {acf.alpha};
      cfg.lambdas = {acf.lambda};
      cfg.ns = {acf.n};
      cfg.horizons = {acf.horizon};
      cfg.acf_factors = acf.factors;
      cfg.truncation = acf.truncation;
      cfg.n_reps = acf.reps;
      cfg.max_lag = acf.max_lag;
      cfg.workers = acf.workers;
      cfg.base_seed = acf.seed;
      usage_check([&] { cfg.validate(); });
      const auto rows = run_experiment(cfg);
      Sink sink(acf.out, out);
      write_summary_csv(sink.stream(), rows);
    } else if (*ec_cmd) {
      ProcessMoments moments{1.0, ec.mean_sigma_sq};
      usage_check([&] {
        moments.validate();
        for (double a : ec.alphas) GammaKernelParams(a, ec.lambda);
        if (!(ec.t > 0.0 && ec.t <= 1.0)) throw DomainError("--t-eval must lie in (0, 1]");
        if (!(ec.depth > 0.0)) throw DomainError("--depth must be positive");
      });
      const C3Form form = ec.form == "printed" ? C3Form::Printed : C3Form::Exact;
      std::vector<ErrorCurveRow> rows;
      for (double a : ec.alphas) {
        const auto curve = error_curve(GammaKernelParams(a, ec.lambda), moments, ec.ns, ec.t,
                                       ec.depth, form);
        rows.insert(rows.end(), curve.begin(), curve.end());
      }
      Sink sink(ec.out, out);
      write_error_curve_csv(sink.stream(), rows);
    } else if (*est_cmd) {
      const SamplePath path = read_path_csv(std::filesystem::path(inf.in));
      const CofEstimate e = cof_estimate(path, inf.p);
      Sink sink(inf.out, out);
      sink.stream() << estimate_json(e).dump(2) << '\n';
    } else if (*ta_cmd) {
      if (!(inf.level > 0.0 && inf.level < 1.0)) throw UsageError("--level must be in (0, 1)");
      if (inf.p != 2.0) throw UsageError("test-alpha supports --p 2 only");
      const SamplePath path = read_path_csv(std::filesystem::path(inf.in));
      const AlphaTest t = test_alpha(path, inf.p, inf.alpha0, inf.level);
      json j = estimate_json(t.estimate);
      j["alpha0"] = inf.alpha0;
      j["z"] = t.z;
      j["reject"] = t.reject;
      j["level"] = t.level;
      Sink sink(inf.out, out);
      sink.stream() << j.dump(2) << '\n';
    } else if (*tv_cmd) {
      const Metric metric = usage_check([&] { return parse_metric(inf.metric); });
      const std::vector<double> levels = parse_levels(inf.levels);
      for (double a : levels) {
        if (!(a > 0.0 && a < 1.0)) throw UsageError("levels must lie in (0, 1)");
      }
      if (inf.p != 2.0 && !inf.lambda_p) throw UsageError("--p other than 2 needs --lambda-p");
      const SamplePath path = read_path_csv(std::filesystem::path(inf.in));
      VolTestOptions options;
      options.lambda_p = inf.lambda_p;
      options.seed = RngSeed{inf.seed, 0};
      const VolTestResult r = vol_test(path, inf.p, metric, levels, options);
      Sink sink(inf.out, out);
      sink.stream() << vol_json(r, inf.p).dump(2) << '\n';
    } else if (*mc_cmd) {
      std::ifstream in(mc.config);
      std::stringstream text;
      text << in.rdbuf();
      ExperimentConfig cfg = usage_check([&] { return parse_experiment_config(text.str()); });
      cfg.workers = mc.workers;
      if (mc.reps) cfg.n_reps = *mc.reps;
      if (mc.seed) cfg.base_seed = *mc.seed;
      usage_check([&] { cfg.validate(); });
      std::string target = mc.out;
      if (!target.empty() && std::filesystem::is_directory(target)) {
        target = (std::filesystem::path(target) / summary_file_name(cfg)).string();
      }
      const auto rows = run_experiment(cfg);
      Sink sink(target, out);
      write_summary_csv(sink.stream(), rows);
      if (!target.empty()) err << "wrote " << target << '\n';
    } else if (*cv_cmd) {
      cv.seed_given = cv_seed->count() > 0;
      const Metric metric = usage_check([&] { return parse_metric(cv.metric); });
      const std::vector<double> levels = parse_levels(cv.levels);
      const bool mc_mode = cv.mode == "mc";
      if (mc_mode && !cv.seed_given) throw UsageError("--mode mc requires --seed");
      if (!(cv.c > 0.0) || !(cv.horizon > 0.0)) throw UsageError("--c and --horizon must be positive");
      if (cv.n_mc < 1 || cv.grid < 2) throw UsageError("--n-mc >= 1 and --grid >= 2 required");
      CriticalValueOptions options;
      options.mode = mc_mode ? CriticalValueMode::MonteCarlo : CriticalValueMode::Auto;
      options.horizon = cv.horizon;
      options.n_mc = cv.n_mc;
      options.grid = cv.grid;
      const auto values = bridge_critical_values(metric, cv.c, levels, RngSeed{cv.seed, 0}, options);
      const bool closed = !mc_mode && metric != Metric::L1;
      Sink sink(cv.out, out);
      auto& s = sink.stream();
      s << "metric,c,level,quantile,n_mc,grid,seed\n";
      for (const auto& [level, q] : values) {
        s << to_string(metric) << ',' << std::setprecision(10) << cv.c << ',' << level << ','
          << std::setprecision(17) << q << ','
          << (closed ? 0 : cv.n_mc) << ',' << (closed ? 0 : cv.grid) << ','
          << (closed ? 0 : cv.seed) << '\n';
      }
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const LengthError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const DegenerateError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const CholeskyFailure& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace bss
