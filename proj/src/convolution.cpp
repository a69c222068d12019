#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <string>

#include "bss/errors.hpp"
#include "bss/simulate.hpp"

namespace bss {

namespace {

// The FFTW planner is not reentrant; plan execution on distinct arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

RealBuffer alloc_real(std::size_t n) { return RealBuffer(fftw_alloc_real(n)); }
ComplexBuffer alloc_complex(std::size_t n) { return ComplexBuffer(fftw_alloc_complex(n)); }

// Smallest 2^a 3^b 5^c >= n.
std::size_t good_fft_size(std::size_t n) {
  std::size_t best = 1;
  while (best < n) best *= 2;
  for (std::size_t p5 = 1; p5 < best; p5 *= 5) {
    for (std::size_t p35 = p5; p35 < best; p35 *= 3) {
      std::size_t v = p35;
      while (v < n) v *= 2;
      best = std::min(best, v);
    }
  }
  return best;
}

}  // namespace

struct ConvolutionScheme::FftPlan {
  std::size_t size = 0;
  std::size_t length = 0;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  ComplexBuffer kernel_spectrum;

  FftPlan(std::span<const double> kernel, std::size_t out_length) {
    length = out_length;
    size = good_fft_size(kernel.size() + out_length - 1);
    const std::size_t bins = size / 2 + 1;
    RealBuffer real = alloc_real(size);
    ComplexBuffer spec = alloc_complex(bins);
    kernel_spectrum = alloc_complex(bins);
    {
      std::lock_guard lock(planner_mutex());
      forward = fftw_plan_dft_r2c_1d(static_cast<int>(size), real.get(), spec.get(),
                                     FFTW_ESTIMATE);
      backward = fftw_plan_dft_c2r_1d(static_cast<int>(size), spec.get(), real.get(),
                                      FFTW_ESTIMATE);
    }
    std::fill(real.get(), real.get() + size, 0.0);
    std::copy(kernel.begin(), kernel.end(), real.get());
    fftw_execute_dft_r2c(forward, real.get(), kernel_spectrum.get());
  }

  ~FftPlan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }

  std::vector<double> convolve(std::span<const double> signal) const {
    const std::size_t bins = size / 2 + 1;
    RealBuffer real = alloc_real(size);
    ComplexBuffer spec = alloc_complex(bins);
    std::fill(real.get(), real.get() + size, 0.0);
    std::copy(signal.begin(), signal.end(), real.get());
    fftw_execute_dft_r2c(forward, real.get(), spec.get());
    for (std::size_t b = 0; b < bins; ++b) {
      const double re = spec[b][0] * kernel_spectrum[b][0] - spec[b][1] * kernel_spectrum[b][1];
      const double im = spec[b][0] * kernel_spectrum[b][1] + spec[b][1] * kernel_spectrum[b][0];
      spec[b][0] = re;
      spec[b][1] = im;
    }
    fftw_execute_dft_c2r(backward, spec.get(), real.get());
    const double scale = 1.0 / static_cast<double>(size);
    std::vector<double> out(length);
    for (std::size_t n = 0; n < length; ++n) out[n] = real[n] * scale;
    return out;
  }
};

ConvolutionScheme::ConvolutionScheme(KernelFunction kernel, const SimGrid& grid,
                                     ConvolutionMethod method, std::size_t fft_threshold)
    : grid_(grid) {
  grid_.validate();
  const int k = grid_.subsample_factor;
  fine_n_ = grid_.n_obs * k;
  fine_m_ = grid_.truncation * k;
  fine_step_ = grid_.step() / k;

  const std::size_t length = static_cast<std::size_t>(fine_n_) + fine_m_;
  kernel_values_.resize(length);
  for (std::size_t t = 0; t < length; ++t) {
    kernel_values_[t] = kernel(static_cast<double>(t + 1) * fine_step_);
  }

  const bool use_fft = method == ConvolutionMethod::Fft ||
                       (method == ConvolutionMethod::Auto && length > fft_threshold);
  if (use_fft) fft_ = std::make_unique<FftPlan>(kernel_values_, length);
}

ConvolutionScheme::~ConvolutionScheme() = default;
ConvolutionScheme::ConvolutionScheme(ConvolutionScheme&&) noexcept = default;
ConvolutionScheme& ConvolutionScheme::operator=(ConvolutionScheme&&) noexcept = default;

std::vector<double> ConvolutionScheme::convolve(std::span<const double> weighted) const {
  const std::size_t length = kernel_values_.size();
  if (weighted.size() != length) {
    throw LengthError("convolve: expected " + std::to_string(length) + " weighted increments");
  }
  std::vector<double> full;
  if (fft_) {
    full = fft_->convolve(weighted);
  } else {
    // Only outputs n >= M - 1 are selected below.
    full.assign(length, 0.0);
    for (std::size_t n = static_cast<std::size_t>(fine_m_) - 1; n < length; ++n) {
      double acc = 0.0;
      for (std::size_t t = 0; t <= n; ++t) acc += kernel_values_[t] * weighted[n - t];
      full[n] = acc;
    }
  }
  // X_i = y[i + M - 1], i = 0..n
  return std::vector<double>(full.begin() + (fine_m_ - 1), full.end());
}

SamplePath ConvolutionScheme::finish(std::vector<double> fine_values) const {
  SamplePath fine{fine_step_, std::move(fine_values)};
  if (grid_.subsample_factor == 1) return fine;
  return subsample(fine, grid_.subsample_factor);
}

SamplePath ConvolutionScheme::simulate(const VolatilitySpec& vol, RngSeed seed) const {
  validate(vol);
  const std::size_t length = kernel_values_.size();
  NormalSource normals(seed);
  VolatilityPath sigma = simulate_volatility(vol, length, fine_step_, normals);

  double rho = 0.0;
  if (const auto* ou = std::get_if<ExpOuVol>(&vol)) rho = ou->leverage_rho;
  const double own = std::sqrt(1.0 - rho * rho);
  const double sd = std::sqrt(fine_step_);

  std::vector<double> weighted(length);
  for (std::size_t q = 0; q < length; ++q) {
    double z = normals();
    if (rho != 0.0) z = rho * sigma.innovations[q] + own * z;
    weighted[q] = sigma.sigma[q] * sd * z;
  }
  return finish(convolve(weighted));
}

SamplePath ConvolutionScheme::simulate(const VolatilitySpec& vol, RngSeed seed,
                                       const IncrementSampler& sampler) const {
  validate(vol);
  if (const auto* ou = std::get_if<ExpOuVol>(&vol); ou && ou->leverage_rho != 0.0) {
    throw DomainError("convolution: leverage requires the Brownian driver");
  }
  const std::size_t length = kernel_values_.size();
  NormalSource normals(seed);
  VolatilityPath sigma = simulate_volatility(vol, length, fine_step_, normals);
  std::vector<double> weighted(length);
  for (std::size_t q = 0; q < length; ++q) {
    weighted[q] = sigma.sigma[q] * sampler(normals.engine(), fine_step_);
  }
  return finish(convolve(weighted));
}

SamplePath simulate_convolution(const GammaKernelParams& params, const VolatilitySpec& vol,
                                const SimGrid& grid, RngSeed seed) {
  return ConvolutionScheme(gamma_kernel(params), grid).simulate(vol, seed);
}

}  // namespace bss
