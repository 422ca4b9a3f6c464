#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "gmrd/spectrum.hpp"
#include "gmrd/waterfill.hpp"

using namespace gmrd;

namespace {
constexpr double kPi = 3.14159265358979323846;

// Characteristic polynomial of the tridiagonal B_n evaluated by the standard
// three-term recurrence; exact up to roundoff, no eigensolver involved.
double char_poly(double a, int n, double lambda) {
  std::vector<double> p(n + 1);
  p[0] = 1.0;
  p[1] = (n == 1 ? 1.0 : 1.0 + a * a) - lambda;
  for (int k = 2; k <= n; ++k) {
    const double dk = (k == n) ? 1.0 : 1.0 + a * a;
    p[k] = (dk - lambda) * p[k - 1] - a * a * p[k - 2];
  }
  return p[n];
}
}  // namespace

TEST_CASE("g_of_w") {
  CHECK(g_of_w(0.5, 0.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(g_of_w(0.5, kPi) == doctest::Approx(2.25).epsilon(1e-15));
  CHECK(g_of_w(0.0, 1.234) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("power_spectrum") {
  const SourceParams flat(0.0, 2.5);
  for (double w : {0.0, 0.4, 3.1}) CHECK(power_spectrum(flat, w) == doctest::Approx(2.5));
  const SourceParams p(0.5, 1.0);
  CHECK(power_spectrum(p, 0.0) == doctest::Approx(4.0).epsilon(1e-15));
  // (1/2pi) integral of S equals the stationary variance sigma^2/(1-a^2).
  const double mean = spectral_average(p, [](double s) { return s; });
  CHECK(mean == doctest::Approx(1.0 / 0.75).epsilon(1e-9));
}

TEST_CASE("exact_eigenvalues basics") {
  const SourceParams p0(0.0, 1.0);
  const EigenSpectrum s0 = exact_eigenvalues(p0, 5);
  for (int i = 0; i < 5; ++i) CHECK(s0.mu(i) == doctest::Approx(1.0).epsilon(1e-14));

  const SourceParams p1(0.7, 1.0);
  const EigenSpectrum s1 = exact_eigenvalues(p1, 1);
  CHECK(s1.mu(0) == doctest::Approx(1.0).epsilon(1e-12));

  // n = 2, a = 0.5: roots of lambda^2 - 2.25 lambda + 1 (trace and det of B_2).
  const SourceParams p2(0.5, 1.0);
  const EigenSpectrum s2 = exact_eigenvalues(p2, 2);
  const double disc = std::sqrt(2.25 * 2.25 - 4.0);
  CHECK(s2.mu(0) == doctest::Approx((2.25 - disc) / 2.0).epsilon(1e-12));
  CHECK(s2.mu(1) == doctest::Approx((2.25 + disc) / 2.0).epsilon(1e-12));
  CHECK(s2.sigma_sq(0) == doctest::Approx(1.0 / s2.mu(0)).epsilon(1e-14));
}

TEST_CASE("characteristic polynomial cross-check for n <= 6") {
  for (double a : {0.1, 0.5, 0.9}) {
    const SourceParams p(a, 1.0);
    for (int n = 2; n <= 6; ++n) {
      const EigenSpectrum s = exact_eigenvalues(p, n);
      for (int i = 0; i < n; ++i) CHECK(std::abs(char_poly(a, n, s.mu(i))) < 1e-8);
    }
  }
}

TEST_CASE("eigenvalue sum rule and range") {
  for (double a : {0.1, 0.5, 0.9}) {
    const SourceParams p(a, 1.0);
    for (int n : {2, 5, 17, 64}) {
      const EigenSpectrum s = exact_eigenvalues(p, n);
      const double trace = (n - 1) * (1.0 + a * a) + 1.0;
      CHECK(s.mu.sum() == doctest::Approx(trace).epsilon(1e-9));
      for (int i = 0; i < n; ++i) {
        CHECK(s.mu(i) >= (1.0 - a) * (1.0 - a) - 1e-10);
        CHECK(s.mu(i) <= (1.0 + a) * (1.0 + a) + 1e-10);
        if (i) CHECK(s.mu(i) >= s.mu(i - 1));
      }
    }
  }
}

TEST_CASE("toeplitz surrogates") {
  const SourceParams p(0.5, 1.0);
  const Eigen::VectorXd xi = toeplitz_eigenvalues(p, 2);
  CHECK(xi(0) == doctest::Approx(0.75).epsilon(1e-14));   // g(pi/3)
  CHECK(xi(1) == doctest::Approx(1.75).epsilon(1e-14));   // g(2pi/3)

  const SourceParams p0(0.0, 1.0);
  const Eigen::VectorXd xi0 = toeplitz_eigenvalues(p0, 4);
  for (int i = 0; i < 4; ++i) CHECK(xi0(i) == doctest::Approx(1.0));

  // Gaps against the exact 2x2 eigenvalues.
  const EigenSpectrum s2 = exact_eigenvalues(p, 2);
  CHECK(s2.xi(0) - s2.mu(0) == doctest::Approx(0.140388).epsilon(1e-4));
  CHECK(s2.xi(1) - s2.mu(1) == doctest::Approx(0.109612).epsilon(1e-4));
  for (int i = 0; i < 2; ++i) {
    CHECK(s2.xi(i) - s2.mu(i) >= 0.0);
    CHECK(s2.xi(i) - s2.mu(i) <= kPi / 2.0);
  }
}

TEST_CASE("surrogate gap bound across a grid") {
  for (double a : {0.1, 0.5, 0.9}) {
    const SourceParams p(a, 1.0);
    for (int n : {2, 5, 10, 50, 200}) {
      const EigenSpectrum s = exact_eigenvalues(p, n);
      const double bound = 2.0 * a * kPi / n;
      for (int i = 0; i < n; ++i) {
        const double gap = s.xi(i) - s.mu(i);
        CHECK(gap >= -1e-12);
        CHECK(gap <= bound + 1e-12);
      }
    }
  }
}

TEST_CASE("szego_sum flat spectrum") {
  const SourceParams p(0.0, 1.0);
  const EigenSpectrum s = exact_eigenvalues(p, 16);
  const SzegoResult r = szego_sum(s, [](double t) { return t; });
  CHECK(r.gap < 1e-12);
}

TEST_CASE("szego_sum n*gap stays bounded at a kinked level") {
  const SourceParams p(0.5, 1.0);
  const double theta = 1.0;
  const double kink[1] = {theta};
  std::vector<double> scaled_min, scaled_log;
  for (int n : {16, 32, 64, 128, 256, 512, 1024}) {
    const EigenSpectrum s = exact_eigenvalues(p, n);
    const SzegoResult rmin =
        szego_sum(s, [&](double t) { return std::min(theta, t); }, kink);
    const SzegoResult rlog = szego_sum(
        s, [&](double t) { return std::max(0.0, 0.5 * std::log(t / theta)); }, kink);
    scaled_min.push_back(n * rmin.gap);
    scaled_log.push_back(n * rlog.gap);
  }
  auto spread_ok = [](const std::vector<double>& v) {
    double lo = v[0], hi = v[0];
    for (double x : v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    return hi <= 4.0 * lo;
  };
  CHECK(spread_ok(scaled_min));
  CHECK(spread_ok(scaled_log));
}

TEST_CASE("spectral_average matches closed second moment") {
  for (double a : {0.3, 0.6}) {
    const SourceParams p(a, 1.7);
    const double got = spectral_average(p, [](double s) { return s * s; });
    CHECK(got == doctest::Approx(spectrum_sq_mean_closed(p)).epsilon(1e-9));
  }
}
