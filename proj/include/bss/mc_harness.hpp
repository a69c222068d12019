#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bss/bridge.hpp"
#include "bss/rng.hpp"

namespace bss {

enum class ExperimentKind {
  BiasRmse,
  AlphaTest,
  VolSize,
  VolPower,
  PStudy,
  AcfCheck,
  InfreqSampling,
  ErrorCurve
};

/// A: constant volatility. B: exp-OU volatility independent of the driver.
/// C: exp-OU volatility with leverage.
enum class Regime { A, B, C };

enum class SimulatorChoice { Auto, Exact, Convolution };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& text);
std::string to_string(Regime regime);
Regime parse_regime(const std::string& text);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::BiasRmse;
  Regime regime = Regime::A;
  std::vector<double> alphas{0.0};
  std::vector<double> lambdas{1.0};
  std::vector<double> betas{5.0};
  std::vector<double> rhos{-0.5};
  std::vector<int> ns{500};
  /// Horizons T; infreq_sampling uses `deltas` instead (T = N delta).
  std::vector<double> horizons{1.0};
  std::vector<double> deltas{1.0};
  std::vector<double> ps{2.0};
  std::vector<double> alpha0s{0.0};
  std::vector<Metric> metrics{Metric::L1, Metric::L2, Metric::Sup};
  std::vector<double> levels{0.01, 0.05, 0.10};
  /// acf_check subsampling factors to compare; other kinds use subsample_factor.
  std::vector<int> acf_factors{1, 100};
  int n_reps = 2000;
  std::uint64_t base_seed = 1;
  /// Default: 10 when alpha < 0 and 1 otherwise (convolution only).
  std::optional<int> subsample_factor;
  int truncation = 1000;
  SimulatorChoice simulator = SimulatorChoice::Auto;
  double sigma0 = 1.0;
  int max_lag = 50;
  /// error_curve: evaluation point t in (0, 1] and truncation depth in time units.
  double error_t = 1.0;
  double error_depth = 2.0;
  int workers = 1;

  void validate() const;
};

/// Reads the JSON experiment description. Unknown keys are rejected.
ExperimentConfig parse_experiment_config(const std::string& json_text);
std::string experiment_config_json(const ExperimentConfig& config);

/// One output row: the cell coordinates and its statistics.
struct McSummary {
  std::vector<std::pair<std::string, std::string>> cell;
  std::optional<double> mean;
  std::optional<double> bias;
  std::optional<double> rmse;
  std::optional<double> rejection_rate;
  double mc_stderr = 0.0;
  int n_reps_effective = 0;
  int n_failed = 0;
  /// Kind-specific extra columns (ACF bands, error decomposition).
  std::vector<std::pair<std::string, double>> extra;

  const std::string& coord(const std::string& name) const;
  double value(const std::string& name) const;
};

std::vector<McSummary> run_experiment(const ExperimentConfig& config);

/// CSV with one line per summary; columns are the union of cell coordinates
/// and the statistics present for the experiment kind.
void write_summary_csv(std::ostream& out, const std::vector<McSummary>& rows);

/// File name encoding the experiment kind and a hash of the configuration.
std::string summary_file_name(const ExperimentConfig& config);

struct NegBiasPoint {
  int n = 0;
  double mean_alpha_hat = 0.0;
  int n_reps_effective = 0;
};

/// Exact constant-volatility paths of n_max steps on [0, 1]; alpha is
/// estimated on the prefixes of N = 10, 20, ..., n_max observations.
std::vector<NegBiasPoint> negbias_curve(double alpha, int n_max, int n_reps, RngSeed seed,
                                        double lambda = 1.0, int workers = 1);

/// Stream id of replication `rep` in the cell identified by `cell_key`.
std::uint64_t replication_stream(const std::string& cell_key, int rep);

}  // namespace bss
