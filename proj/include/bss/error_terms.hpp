#pragma once

#include <ostream>
#include <span>
#include <vector>

#include "bss/kernel.hpp"
#include "bss/simulate.hpp"

namespace bss {

/// L2 error E[(X(t) - X~(t))^2] = c1 + c2 + c3 of the truncated step-function
/// scheme at t = i delta.
struct ErrorBreakdown {
  double c1 = 0.0;   // kappa int g^2 E[sigma^2]
  double c2 = 0.0;   // kappa int g~^2 E[sigma~^2]
  double c3 = 0.0;   // -2 kappa int g g~ E[sigma sigma~]
  double mse = 0.0;
  double rmse = 0.0;
};

enum class C3Form {
  /// Cross term of the gamma kernel against its left-endpoint step
  /// approximation, cell by cell through the incomplete gamma function.
  Exact,
  /// The historical closed form with (j delta)^{2 alpha} e^{-2 lambda j delta}
  /// weights and incomplete-gamma arguments shifted by one cell. Kept for
  /// comparison; it does not reproduce the quadrature value.
  Printed,
};

/// Closed-form error terms at grid index i (0 <= i <= N) for the grid's
/// step and truncation M; sums run over j = 1..i+M.
///
/// Exact for constant volatility. For stochastic volatility the cross term
/// assumes sigma is a martingale (E[sigma(s) sigma~(s)] = E[sigma^2]); the
/// exp-OU volatility is not one, so the result is then approximate.
ErrorBreakdown error_terms(const GammaKernelParams& params, const ProcessMoments& moments,
                           const SimGrid& grid, int i, C3Form form = C3Form::Exact);

struct ErrorCurveRow {
  int n = 0;
  double alpha = 0.0;
  double lambda = 0.0;
  ErrorBreakdown error;
};

/// Error at time t on [0, 1] grids with step 1/N for every N in n_list, with
/// truncation M = ceil(m_time N) so the physical depth stays fixed.
std::vector<ErrorCurveRow> error_curve(const GammaKernelParams& params,
                                       const ProcessMoments& moments, std::span<const int> n_list,
                                       double t, double m_time, C3Form form = C3Form::Exact);

/// CSV with header N,alpha,lambda,c1,c2,c3,mse,rmse.
void write_error_curve_csv(std::ostream& out, std::span<const ErrorCurveRow> rows);

}  // namespace bss
