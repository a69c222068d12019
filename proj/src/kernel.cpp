#include "bss/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bss/errors.hpp"
#include "bss/specfun.hpp"

namespace bss {

GammaKernelParams::GammaKernelParams(double alpha, double lambda)
    : alpha_(alpha), lambda_(lambda) {
  if (!(alpha > -0.5)) {
    throw DomainError("gamma kernel: alpha must exceed -1/2, got " + std::to_string(alpha));
  }
  if (!(lambda > 0.0)) {
    throw DomainError("gamma kernel: lambda must be positive, got " + std::to_string(lambda));
  }
}

void ProcessMoments::validate() const {
  if (!(kappa >= 0.0) || !(mean_sigma_sq >= 0.0)) {
    throw DomainError("process moments must be nonnegative");
  }
}

double kernel_eval(const GammaKernelParams& params, double x) {
  if (x < 0.0) throw DomainError("kernel_eval: x must be nonnegative");
  if (x == 0.0) {
    if (params.alpha() > 0.0) return 0.0;
    if (params.alpha() == 0.0) return 1.0;
    throw SingularityError("kernel_eval: gamma kernel is singular at 0 for alpha < 0");
  }
  return std::pow(x, params.alpha()) * std::exp(-params.lambda() * x);
}

KernelFunction gamma_kernel(const GammaKernelParams& params) {
  return [params](double x) { return kernel_eval(params, x); };
}

double matern_rho(const GammaKernelParams& params, double h) {
  if (h < 0.0) h = -h;
  if (h == 0.0) return 1.0;
  const double nu = params.alpha() + 0.5;
  const double x = params.lambda() * h;
  const double rho = std::pow(2.0, 1.0 - nu) / specfun::gamma_fn(nu) * std::pow(x, nu) *
                     specfun::bessel_k(nu, x);
  return std::min(rho, 1.0);
}

double acvf_gamma(const GammaKernelParams& params, const ProcessMoments& moments, double h) {
  moments.validate();
  const double e = 2.0 * params.alpha() + 1.0;
  const double variance =
      moments.scale() * specfun::gamma_fn(e) * std::pow(2.0 * params.lambda(), -e);
  return h == 0.0 ? variance : variance * matern_rho(params, h);
}

double gaussian_core_scale(const GammaKernelParams& params, double delta) {
  if (!(delta > 0.0)) throw DomainError("gaussian_core_scale: delta must be positive");
  const ProcessMoments unit{};
  const double g0 = acvf_gamma(params, unit, 0.0);
  return std::sqrt(2.0 * g0 * (1.0 - matern_rho(params, delta)));
}

}  // namespace bss
