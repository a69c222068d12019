#include "bss/simulate.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "bss/errors.hpp"

namespace bss {

void SimGrid::validate() const {
  if (n_obs < 2) throw DomainError("grid: n_obs must be at least 2");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw DomainError("grid: horizon must be positive");
  }
  if (truncation < 1) throw DomainError("grid: truncation must be at least 1");
  if (subsample_factor < 1) throw DomainError("grid: subsample factor must be at least 1");
}

void validate(const VolatilitySpec& spec) {
  if (const auto* c = std::get_if<ConstantVol>(&spec)) {
    if (!(c->sigma0 > 0.0)) throw DomainError("volatility: sigma0 must be positive");
    return;
  }
  const auto& ou = std::get<ExpOuVol>(spec);
  if (!(ou.beta > 0.0)) throw DomainError("volatility: beta must be positive");
  if (!(std::abs(ou.leverage_rho) <= 1.0)) {
    throw DomainError("volatility: leverage correlation must lie in [-1, 1]");
  }
}

void validate_path(const SamplePath& path, std::size_t min_points) {
  if (!(path.step > 0.0) || !std::isfinite(path.step)) {
    throw DataError("path: step must be positive");
  }
  if (path.values.size() < min_points) {
    throw LengthError("path: need at least " + std::to_string(min_points) + " points, got " +
                      std::to_string(path.values.size()));
  }
  for (double v : path.values) {
    if (!std::isfinite(v)) throw DataError("path: non-finite value");
  }
}

// ---------------------------------------------------------------------------
// Exact Gaussian simulation

ExactGaussianSimulator::ExactGaussianSimulator(const GammaKernelParams& params, double sigma0,
                                               int n_obs, double horizon) {
  if (!(sigma0 > 0.0)) throw DomainError("exact simulation: sigma0 must be positive");
  SimGrid{n_obs, horizon}.validate();
  step_ = horizon / n_obs;
  const int size = n_obs + 1;

  const ProcessMoments unit{};
  std::vector<double> acvf(size);
  for (int h = 0; h < size; ++h) {
    acvf[h] = sigma0 * sigma0 * acvf_gamma(params, unit, h * step_);
  }
  covariance_.resize(size, size);
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) covariance_(i, j) = acvf[std::abs(i - j)];
  }

  Eigen::LLT<Eigen::MatrixXd> llt(covariance_);
  if (llt.info() != Eigen::Success) {
    Eigen::MatrixXd jittered = covariance_;
    jittered.diagonal().array() += 1e-12 * acvf[0];
    llt.compute(jittered);
    if (llt.info() != Eigen::Success) {
      throw CholeskyFailure("exact simulation: covariance is not positive definite (alpha=" +
                            std::to_string(params.alpha()) + ", n=" + std::to_string(n_obs) + ")");
    }
    jittered_ = true;
  }
  factor_ = llt.matrixL();
}

SamplePath ExactGaussianSimulator::simulate(RngSeed seed) const {
  const auto size = factor_.rows();
  Eigen::VectorXd z(size);
  NormalSource normals(seed);
  normals.fill(std::span<double>(z.data(), static_cast<std::size_t>(size)));
  Eigen::VectorXd x = factor_.triangularView<Eigen::Lower>() * z;
  return SamplePath{step_, std::vector<double>(x.data(), x.data() + size)};
}

Eigen::MatrixXd ExactGaussianSimulator::simulate_batch(std::span<const RngSeed> seeds) const {
  const auto size = factor_.rows();
  Eigen::MatrixXd z(size, static_cast<Eigen::Index>(seeds.size()));
  for (std::size_t r = 0; r < seeds.size(); ++r) {
    NormalSource normals(seeds[r]);
    normals.fill(std::span<double>(z.col(static_cast<Eigen::Index>(r)).data(),
                                   static_cast<std::size_t>(size)));
  }
  return factor_.triangularView<Eigen::Lower>() * z;
}

SamplePath simulate_exact_gaussian(const GammaKernelParams& params, double sigma0,
                                   const SimGrid& grid, RngSeed seed) {
  grid.validate();
  return ExactGaussianSimulator(params, sigma0, grid.n_obs, grid.horizon).simulate(seed);
}

// ---------------------------------------------------------------------------
// Volatility

VolatilityPath simulate_volatility(const VolatilitySpec& spec, std::size_t count, double step,
                                   NormalSource& normals) {
  validate(spec);
  VolatilityPath out;
  if (const auto* c = std::get_if<ConstantVol>(&spec)) {
    out.sigma.assign(count, c->sigma0);
    return out;
  }
  const auto& ou = std::get<ExpOuVol>(spec);
  const double decay = std::exp(-ou.beta * step);
  const double innovation_sd = std::sqrt((1.0 - decay * decay) / (2.0 * ou.beta));
  // Stationary start one step before the first returned time.
  double log_sigma = normals() / std::sqrt(2.0 * ou.beta);
  log_sigma = decay * log_sigma + innovation_sd * normals();

  out.sigma.resize(count);
  out.innovations.resize(count);
  for (std::size_t q = 0; q < count; ++q) {
    out.sigma[q] = std::exp(log_sigma);
    const double z = normals();
    out.innovations[q] = z;
    log_sigma = decay * log_sigma + innovation_sd * z;
  }
  return out;
}

VolatilityPath simulate_volatility(const VolatilitySpec& spec, const SimGrid& grid,
                                   RngSeed seed) {
  grid.validate();
  NormalSource normals(seed);
  return simulate_volatility(spec, static_cast<std::size_t>(grid.n_obs + grid.truncation),
                             grid.step(), normals);
}

SamplePath subsample(const SamplePath& path, int k) {
  if (k < 1) throw DomainError("subsample: k must be at least 1");
  if (path.values.empty() || (path.values.size() - 1) % static_cast<std::size_t>(k) != 0) {
    throw LengthError("subsample: number of steps is not divisible by k=" + std::to_string(k));
  }
  SamplePath out;
  out.step = path.step * k;
  out.values.reserve((path.values.size() - 1) / k + 1);
  for (std::size_t i = 0; i < path.values.size(); i += static_cast<std::size_t>(k)) {
    out.values.push_back(path.values[i]);
  }
  return out;
}

double scheme_covariance(const KernelFunction& kernel, const SimGrid& grid, int i, int l) {
  grid.validate();
  if (i > l) std::swap(i, l);
  if (i < 0 || l > grid.n_obs) throw DomainError("scheme_covariance: index outside grid");
  const int k = grid.subsample_factor;
  const double d = grid.step() / k;
  const int fi = i * k;
  const int lag = (l - i) * k;
  const int depth = fi + grid.truncation * k;
  double sum = 0.0;
  for (int m = 1; m <= depth; ++m) sum += kernel(m * d) * kernel((m + lag) * d);
  return sum * d;
}

}  // namespace bss
