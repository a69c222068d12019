#include "bss/error_terms.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "bss/errors.hpp"
#include "bss/specfun.hpp"

namespace bss {

ErrorBreakdown error_terms(const GammaKernelParams& params, const ProcessMoments& moments,
                           const SimGrid& grid, int i, C3Form form) {
  grid.validate();
  moments.validate();
  if (i < 0 || i > grid.n_obs) throw DomainError("error_terms: index outside grid");

  const double a = params.alpha();
  const double lam = params.lambda();
  const double d = grid.step();
  const double scale = moments.scale();
  const int terms = i + grid.truncation;

  ErrorBreakdown out;
  out.c1 = scale * std::pow(2.0 * lam, -2.0 * a - 1.0) * specfun::gamma_fn(2.0 * a + 1.0);

  const double norm = std::pow(lam, -a - 1.0);
  double c2 = 0.0;
  double c3 = 0.0;
  double inc_prev = 0.0;  // gamma(a+1, lambda (j-1) d)
  double inc_prev2 = 0.0; // gamma(a+1, lambda (j-2) d)
  for (int j = 1; j <= terms; ++j) {
    const double x = j * d;
    const double g = std::pow(x, a) * std::exp(-lam * x);
    c2 += g * g;
    const double inc = specfun::lower_incomplete_gamma(a + 1.0, lam * x);
    if (form == C3Form::Exact) {
      c3 += g * (inc - inc_prev);
    } else {
      c3 += g * g * (inc_prev - inc_prev2);
    }
    inc_prev2 = inc_prev;
    inc_prev = inc;
  }
  out.c2 = scale * d * c2;
  out.c3 = -2.0 * scale * norm * c3;
  out.mse = out.c1 + out.c2 + out.c3;
  out.rmse = std::sqrt(std::max(out.mse, 0.0));
  return out;
}

std::vector<ErrorCurveRow> error_curve(const GammaKernelParams& params,
                                       const ProcessMoments& moments, std::span<const int> n_list,
                                       double t, double m_time, C3Form form) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("error_curve: t must lie in [0, 1]");
  if (!(m_time > 0.0)) throw DomainError("error_curve: truncation time must be positive");
  std::vector<ErrorCurveRow> rows;
  rows.reserve(n_list.size());
  for (int n : n_list) {
    if (n < 2) throw DomainError("error_curve: N must be at least 2");
    SimGrid grid{n, 1.0, static_cast<int>(std::ceil(m_time * n - 1e-9)), 1};
    const int i = static_cast<int>(std::floor(t * n + 1e-9));
    rows.push_back({n, params.alpha(), params.lambda(), error_terms(params, moments, grid, i, form)});
  }
  return rows;
}

void write_error_curve_csv(std::ostream& out, std::span<const ErrorCurveRow> rows) {
  out << "N,alpha,lambda,c1,c2,c3,mse,rmse\n";
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.n << ',' << r.alpha << ',' << r.lambda << ',' << r.error.c1 << ',' << r.error.c2
        << ',' << r.error.c3 << ',' << r.error.mse << ',' << r.error.rmse << '\n';
  }
}

}  // namespace bss
