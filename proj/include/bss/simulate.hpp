#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "bss/kernel.hpp"
#include "bss/rng.hpp"

namespace bss {

/// Equidistant simulation grid: N points after time 0 on [0, T], step T/N.
/// `truncation` is the depth M (in base-grid steps) at which the stochastic
/// integral is cut off below; `subsample_factor` k makes the convolution
/// scheme run on step delta/k and keep every k-th point.
struct SimGrid {
  int n_obs = 0;
  double horizon = 1.0;
  int truncation = 1000;
  int subsample_factor = 1;

  double step() const { return horizon / n_obs; }
  void validate() const;
};

struct ConstantVol {
  double sigma0 = 1.0;
};

/// log sigma is a stationary Gaussian OU process with mean reversion beta;
/// its innovations correlate with the driver's by leverage_rho.
struct ExpOuVol {
  double beta = 1.0;
  double leverage_rho = 0.0;
};

using VolatilitySpec = std::variant<ConstantVol, ExpOuVol>;

void validate(const VolatilitySpec& spec);

/// Observations X(0), X(delta), ..., X(N delta).
struct SamplePath {
  double step = 1.0;
  std::vector<double> values;

  std::size_t n_obs() const { return values.empty() ? 0 : values.size() - 1; }
  double horizon() const { return step * static_cast<double>(n_obs()); }
};

/// Throws LengthError if the path has fewer than `min_points` points and
/// DataError on a nonpositive step or non-finite values.
void validate_path(const SamplePath& path, std::size_t min_points);

/// Exact simulation of the constant-volatility Brownian driven process via the
/// Cholesky factor of the Toeplitz covariance sigma0^2 gamma((i-j) delta).
/// The factor is computed once; each simulate() call draws a fresh path.
class ExactGaussianSimulator {
 public:
  ExactGaussianSimulator(const GammaKernelParams& params, double sigma0, int n_obs,
                         double horizon);

  SamplePath simulate(RngSeed seed) const;

  /// One path per column; column r equals simulate(seeds[r]) up to rounding
  /// (the product is blocked differently). Deterministic for a fixed batch.
  Eigen::MatrixXd simulate_batch(std::span<const RngSeed> seeds) const;

  const Eigen::MatrixXd& covariance() const { return covariance_; }
  /// Lower-triangular L with L L^T = covariance (+ jitter when jittered()).
  const Eigen::MatrixXd& factor() const { return factor_; }
  bool jittered() const { return jittered_; }
  double step() const { return step_; }

 private:
  double step_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd factor_;
  bool jittered_ = false;
};

SamplePath simulate_exact_gaussian(const GammaKernelParams& params, double sigma0,
                                   const SimGrid& grid, RngSeed seed);

struct VolatilityPath {
  /// sigma at times (q - M) delta, q = 0..count-1.
  std::vector<double> sigma;
  /// Standard normal innovation driving log sigma from (q - M) delta to
  /// (q - M + 1) delta. Empty for constant volatility.
  std::vector<double> innovations;
};

/// Volatility on the base grid of `grid`, indices -M .. N-1.
VolatilityPath simulate_volatility(const VolatilitySpec& spec, const SimGrid& grid,
                                   RngSeed seed);

/// `count` volatility values spaced by `step`, drawing from `normals`.
/// The OU recursion starts one step before the first returned time from its
/// stationary law N(0, 1/(2 beta)).
VolatilityPath simulate_volatility(const VolatilitySpec& spec, std::size_t count, double step,
                                   NormalSource& normals);

/// Draws one driver increment over a step of the given length.
using IncrementSampler = std::function<double(Engine&, double step)>;

enum class ConvolutionMethod { Auto, Direct, Fft };

/// Step-function discretization of X(t) = int g(t-s) sigma(s-) dL(s):
///
///   X(i delta) ~ sum_{j=-M+1}^{i} g((i-j+1) delta) sigma((j-1) delta) dL_j,
///
/// evaluated as a discrete convolution. With subsample_factor k > 1 the sum
/// runs on step delta/k with depth kM and every k-th point is returned.
class ConvolutionScheme {
 public:
  /// Direct summation is used when `Auto` and the convolution length
  /// (N + M on the fine grid) is at most fft_threshold.
  ConvolutionScheme(KernelFunction kernel, const SimGrid& grid,
                    ConvolutionMethod method = ConvolutionMethod::Auto,
                    std::size_t fft_threshold = 4096);
  ~ConvolutionScheme();
  ConvolutionScheme(ConvolutionScheme&&) noexcept;
  ConvolutionScheme& operator=(ConvolutionScheme&&) noexcept;

  /// Brownian driver.
  SamplePath simulate(const VolatilitySpec& vol, RngSeed seed) const;

  /// Custom iid driver. Leverage is only defined for the Brownian driver.
  SamplePath simulate(const VolatilitySpec& vol, RngSeed seed,
                      const IncrementSampler& sampler) const;

  /// Given weighted increments s_q = sigma((q-M) d) dL_q, q = 0..n+M-1 on the
  /// fine grid, returns X(i d) for i = 0..n (fine grid, not subsampled).
  std::vector<double> convolve(std::span<const double> weighted) const;

  int fine_points() const { return fine_n_; }
  int fine_truncation() const { return fine_m_; }
  double fine_step() const { return fine_step_; }
  bool uses_fft() const { return static_cast<bool>(fft_); }
  const SimGrid& grid() const { return grid_; }

 private:
  struct FftPlan;

  SamplePath finish(std::vector<double> fine_values) const;

  SimGrid grid_;
  int fine_n_;
  int fine_m_;
  double fine_step_;
  std::vector<double> kernel_values_;  // g((t+1) d), t = 0..n+M-1
  std::unique_ptr<FftPlan> fft_;
};

SamplePath simulate_convolution(const GammaKernelParams& params, const VolatilitySpec& vol,
                                const SimGrid& grid, RngSeed seed);

/// Points 0, k, 2k, ... with step k delta. Throws LengthError unless k divides
/// the number of steps.
SamplePath subsample(const SamplePath& path, int k);

/// Covariance of the step-function scheme with sigma = 1 and a Brownian driver
/// between base-grid points i and l, including subsampling and truncation.
double scheme_covariance(const KernelFunction& kernel, const SimGrid& grid, int i, int l);

}  // namespace bss
