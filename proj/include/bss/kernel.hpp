#pragma once

#include <functional>

namespace bss {

/// Parameters of the gamma kernel g(x) = x^alpha e^{-lambda x}.
class GammaKernelParams {
 public:
  /// Throws DomainError unless alpha > -1/2 and lambda > 0.
  GammaKernelParams(double alpha, double lambda);

  double alpha() const { return alpha_; }
  double lambda() const { return lambda_; }

 private:
  double alpha_;
  double lambda_;
};

/// kappa = Var(L(1)) and E[sigma^2(0)].
struct ProcessMoments {
  double kappa = 1.0;
  double mean_sigma_sq = 1.0;

  double scale() const { return kappa * mean_sigma_sq; }
  void validate() const;
};

/// Kernel seam consumed by the convolution scheme: any x -> g(x) on x > 0.
using KernelFunction = std::function<double(double)>;

/// g(x) = x^alpha e^{-lambda x}.
///
/// At x = 0 returns 0 for alpha > 0 and 1 for alpha = 0; throws
/// SingularityError for alpha < 0. Throws DomainError for x < 0.
double kernel_eval(const GammaKernelParams& params, double x);

/// The gamma kernel as a KernelFunction.
KernelFunction gamma_kernel(const GammaKernelParams& params);

/// Matern correlation rho(h) of the gamma-kernel process; rho(0) = 1.
double matern_rho(const GammaKernelParams& params, double h);

/// Autocovariance gamma(h) = kappa E[sigma^2] int_0^inf g(x) g(x+h) dx in
/// closed form: the variance is kappa E[sigma^2] Gamma(2a+1) (2 lambda)^{-(2a+1)},
/// and gamma(h) = gamma(0) rho(h).
double acvf_gamma(const GammaKernelParams& params, const ProcessMoments& moments, double h);

/// Increment scale c(delta) = E[(G(delta) - G(0))^2]^{1/2} of the Gaussian core
/// (unit kappa and volatility).
double gaussian_core_scale(const GammaKernelParams& params, double delta);

}  // namespace bss
