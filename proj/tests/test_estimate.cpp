#include <doctest.h>

#include <cmath>
#include <vector>

#include "bss/errors.hpp"
#include "bss/estimate.hpp"
#include "bss/simulate.hpp"

using namespace bss;

namespace {

// Autocovariance of fBm increments from the fBm covariance itself.
long double fbm_cov(long double s, long double t, long double h2) {
  return 0.5L * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::fabs(t - s), h2));
}

long double fgn_oracle(double alpha, int j) {
  const long double h2 = 2.0L * alpha + 1.0L;
  const long double s = j;
  return fbm_cov(s + 1, 1, h2) - fbm_cov(s + 1, 0, h2) - fbm_cov(s, 1, h2) + fbm_cov(s, 0, h2);
}

// Covariance of B(t) - 2B(t-1) + B(t-2) at lag j, normalized.
long double second_diff_oracle(double alpha, int j) {
  const long double h2 = 2.0L * alpha + 1.0L;
  const long double w[3] = {1, -2, 1};
  auto cov = [&](int lag) {
    long double c = 0;
    const long double base = 10.0L;  // any origin; stationarity of increments
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        c += w[a] * w[b] * fbm_cov(base + lag - a, base - b, h2);
      }
    }
    return c;
  };
  return cov(j) / cov(0);
}

}  // namespace

TEST_CASE("fractional Gaussian noise correlations") {
  CHECK(fgn_rho(0.0, 0) == 1.0);
  for (int j = 1; j < 10; ++j) CHECK(std::abs(fgn_rho(0.0, j)) < 1e-15);
  CHECK(fgn_rho(0.25, 1) == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-14));
  CHECK(fgn_rho(-0.25, 1) == doctest::Approx(0.5 * (std::sqrt(2.0) - 2.0)).epsilon(1e-14));
  for (double alpha : {-0.4, -0.2, 0.1, 0.3, 0.45}) {
    for (int j : {1, 2, 5, 23, 24, 25, 100, 1000}) {
      CHECK(fgn_rho(alpha, j) == doctest::Approx(static_cast<double>(fgn_oracle(alpha, j))).epsilon(1e-9));
    }
    CHECK(fgn_rho(alpha, -3) == fgn_rho(alpha, 3));
    CHECK((fgn_rho(alpha, 1) > 0) == (alpha > 0));
  }
  // Asymptotic decay j^{2 alpha - 1}.
  const double ratio = fgn_rho(0.2, 20000) / fgn_rho(0.2, 10000);
  CHECK(ratio == doctest::Approx(std::pow(2.0, -0.6)).epsilon(1e-6));
  CHECK_THROWS_AS(fgn_rho(0.5, 1), DomainError);
}

TEST_CASE("second-difference correlations") {
  CHECK(second_diff_rho(0.0, 0) == 1.0);
  CHECK(second_diff_rho(0.0, 1) == doctest::Approx(-0.5).epsilon(1e-14));
  for (int j = 2; j < 40; ++j) CHECK(std::abs(second_diff_rho(0.0, j)) < 1e-12);
  for (double alpha : {-0.4, -0.125, 0.2, 0.45}) {
    for (int j : {1, 2, 3, 10, 23, 24, 30}) {
      CHECK(second_diff_rho(alpha, j) ==
            doctest::Approx(static_cast<double>(second_diff_oracle(alpha, j))).epsilon(1e-8));
    }
    CHECK(second_diff_rho(alpha, -2) == second_diff_rho(alpha, 2));
  }
}

TEST_CASE("lambda2 scalar") {
  CHECK(lambda2_scalar(0.0) == 2.0);
  CHECK(lambda2_scalar(-0.25) > 2.17);
  // Brute-force long double sum with a crude tail integral as oracle.
  for (double alpha : {-0.25, 0.1}) {
    long double sum = 0;
    const int terms = 2'000'000;
    for (int j = terms; j >= 1; --j) sum += std::pow(fgn_oracle(alpha, j), 2);
    const double c = alpha * (2 * alpha + 1);
    const double q = 2.0 - 4.0 * alpha;
    const double tail = c * c * std::pow(terms + 0.5, 1.0 - q) / (q - 1.0);
    CHECK(lambda2_scalar(alpha) == doctest::Approx(2.0 + 2.0 * (double(sum) + tail)).epsilon(1e-9));
  }
  // Close to the boundary the tail dominates; J -> 2J leaves the value fixed.
  CHECK(lambda2_scalar(0.24, 8192) == doctest::Approx(lambda2_scalar(0.24, 16384)).epsilon(1e-10));
  CHECK(lambda2_scalar(0.2) > lambda2_scalar(0.1));
  CHECK_THROWS_AS(lambda2_scalar(0.25), DomainError);
  CHECK_THROWS_AS(lambda2_scalar(-0.5), DomainError);
}

TEST_CASE("lambda2 matrix") {
  const Lambda2Matrix m0 = lambda2_matrix(0.0);
  CHECK(m0.l11 == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(m0.l12 == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(m0.l22 == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(m0.contrast() == doctest::Approx(3.5).epsilon(1e-12));
  for (double alpha = -0.45; alpha < 0.2; alpha += 0.013) {
    const Lambda2Matrix m = lambda2_matrix(alpha);
    CHECK(m.l11 > 0.0);
    CHECK(m.l22 > 0.0);
    CHECK(m.l11 * m.l22 - m.l12 * m.l12 >= 0.0);
    CHECK(m.contrast() >= 0.0);
    const Lambda2Matrix a = lambda2_matrix(alpha, 4096);
    const Lambda2Matrix b = lambda2_matrix(alpha, 8192);
    CHECK(std::abs(a.l11 - b.l11) < 1e-8);
    CHECK(std::abs(a.l12 - b.l12) < 1e-8);
    CHECK(std::abs(a.l22 - b.l22) < 1e-8);
    const Lambda2Matrix c = lambda2_matrix(alpha + 1e-6);
    CHECK(std::abs(c.l11 - m.l11) < 1e-4);
    CHECK(std::abs(c.l12 - m.l12) < 1e-4);
    CHECK(std::abs(c.l22 - m.l22) < 1e-4);
  }
  CHECK_THROWS_AS(lambda2_matrix(0.25), DomainError);
  CHECK_THROWS_AS(lambda2_matrix(-0.5), DomainError);
}

TEST_CASE("COF estimate on simple paths") {
  CHECK_THROWS_AS(cof_estimate(SamplePath{0.1, {0, 1, 2, 3, 4, 5}}, 2.0), DegenerateError);
  CHECK_THROWS_AS(cof_estimate(SamplePath{0.1, {0, 1, 2, 3}}, 2.0), LengthError);
  CHECK_THROWS_AS(cof_estimate(SamplePath{0.1, {0, 1, 0, 3, 1}}, 0.0), DomainError);

  const SamplePath x{0.1, {0.0, 1.0, -0.5, 2.0, 0.3, 1.1, -1.0}};
  const CofEstimate e = cof_estimate(x, 2.0);
  CHECK(e.alpha_hat == doctest::Approx(std::log2(e.cof_value) / 2.0 - 0.5).epsilon(1e-15));
  CHECK(e.n_used == 6);
  const CofEstimate e3 = cof_estimate(x, 3.0);
  CHECK(e3.alpha_hat == doctest::Approx(std::log2(e3.cof_value) / 3.0 - 0.5).epsilon(1e-15));
  CHECK_FALSE(e3.std_error.has_value());
  CHECK_FALSE(cof_estimate(x, 2.0, false).std_error.has_value());
}

TEST_CASE("COF estimate is invariant under affine trends and scaling") {
  const SamplePath x = simulate_exact_gaussian(GammaKernelParams(-0.1, 1.0), 1.0,
                                               SimGrid{500, 1.0}, {4, 4});
  const CofEstimate base = cof_estimate(x, 2.0);
  SamplePath y = x;
  for (std::size_t i = 0; i < y.values.size(); ++i) {
    y.values[i] = 4.0 * x.values[i] + 3.0 - 2.5 * i * x.step;
  }
  const CofEstimate moved = cof_estimate(y, 2.0);
  CHECK(moved.alpha_hat == doctest::Approx(base.alpha_hat).epsilon(1e-12));
  SamplePath z = x;
  for (double& v : z.values) v *= 0.125;
  CHECK(cof_estimate(z, 2.0).alpha_hat == base.alpha_hat);
  CHECK(cof_estimate(z, 2.0).z_stat_vs(0.1) == base.z_stat_vs(0.1));
}

TEST_CASE("fractional Gaussian noise path recovers H") {
  // Exact fGn with H = 0.75 by Cholesky of its correlation; alpha = H - 1/2.
  const double alpha = 0.25;
  const int n = 4000;
  std::vector<double> acf(n);
  for (int j = 0; j < n; ++j) acf[j] = fgn_rho(alpha, j);
  Eigen::MatrixXd c(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c(i, j) = acf[std::abs(i - j)];
  const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(c).matrixL();
  double mean = 0.0;
  const int reps = 8;
  for (int r = 0; r < reps; ++r) {
    NormalSource normals({99, static_cast<std::uint64_t>(r)});
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z(i) = normals();
    const Eigen::VectorXd inc = l * z;
    SamplePath path{1.0 / n, std::vector<double>(n + 1, 0.0)};
    for (int i = 0; i < n; ++i) path.values[i + 1] = path.values[i] + inc(i);
    mean += cof_estimate(path, 2.0).alpha_hat / reps;
  }
  CHECK(mean == doctest::Approx(0.25).epsilon(0.04));
}

TEST_CASE("alpha test contract") {
  const SamplePath x = simulate_exact_gaussian(GammaKernelParams(0.0, 1.0), 1.0,
                                               SimGrid{2000, 1.0}, {12, 0});
  const AlphaTest t = test_alpha(x, 2.0, 0.0, 0.05);
  CHECK(t.z == doctest::Approx(t.estimate.alpha_hat / *t.estimate.std_error));
  CHECK(t.reject == (std::abs(t.z) > 1.959963984540054));
  CHECK(*t.estimate.std_error == doctest::Approx(0.03).epsilon(0.15));
  CHECK_THROWS_AS(test_alpha(x, 1.0, 0.0, 0.05), DomainError);
  CHECK_THROWS_AS(test_alpha(x, 2.0, 0.0, 1.5), DomainError);
  // Smooth path: alpha_hat above 1/4 is reported, not extrapolated.
  SamplePath smooth{0.01, {}};
  for (int i = 0; i <= 100; ++i) smooth.values.push_back(std::sin(0.3 * i) + 1e-3 * std::cos(7.1 * i * i));
  const CofEstimate se = cof_estimate(smooth, 2.0);
  if (se.alpha_hat >= 0.25) {
    CHECK_FALSE(se.std_error.has_value());
    CHECK_THROWS_AS(test_alpha(smooth, 2.0, 0.0, 0.05), DomainError);
  }
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
}
