#include "gmrd/spectrum.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gmrd/quadrature.hpp"

namespace gmrd {

namespace {

constexpr double kPi = 3.1415926535897932385;

// Number of eigenvalues of the tridiagonal (diag, off) below x, counted with
// the pivoted Sturm recurrence. Vanishing pivots are clamped to -pivmin and
// counted, which keeps the count consistent when x lands on a minor's
// eigenvalue (bisection midpoints do hit the diagonal value exactly).
int sturm_count_below(const Eigen::VectorXd& diag, const Eigen::VectorXd& off, double x) {
  const double pivmin = 1e-290;
  int count = 0;
  double q = diag(0) - x;
  if (std::abs(q) <= pivmin) q = -pivmin;
  if (q < 0.0) ++count;
  for (int i = 1; i < diag.size(); ++i) {
    q = diag(i) - x - off(i - 1) * off(i - 1) / q;
    if (std::abs(q) <= pivmin) q = -pivmin;
    if (q < 0.0) ++count;
  }
  return count;
}

}  // namespace

double g_of_w(double a, double w) { return 1.0 + a * a - 2.0 * a * std::cos(w); }

double power_spectrum(const SourceParams& params, double w) {
  return params.sigma2 / g_of_w(params.a, w);
}

EigenSpectrum exact_eigenvalues(const SourceParams& params, int n) {
  if (n < 1) throw std::domain_error("exact_eigenvalues: blocklength must be >= 1");
  const double a = params.a;
  EigenSpectrum out{params, n, Eigen::VectorXd(n), Eigen::VectorXd(n),
                    toeplitz_eigenvalues(params, n)};
  if (a == 0.0 || n == 1) {
    // B_n is the identity for a = 0; B_1 = [1] for any a.
    out.mu.setOnes();
    out.sigma_sq.setConstant(params.sigma2);
    return out;
  }
  Eigen::VectorXd diag = Eigen::VectorXd::Constant(n, 1.0 + a * a);
  diag(n - 1) = 1.0;
  const Eigen::VectorXd off = Eigen::VectorXd::Constant(n - 1, -a);
  // Gershgorin interval for B_n, padded.
  const double lo0 = (1.0 - a) * (1.0 - a) - 1e-8;
  const double hi0 = (1.0 + a) * (1.0 + a) + 1e-8;
  for (int i = 1; i <= n; ++i) {
    double lo = lo0, hi = hi0;
    // mu_i = inf { x : #(eigenvalues < x) >= i }
    while (hi - lo > 1e-13) {
      const double mid = 0.5 * (lo + hi);
      if (sturm_count_below(diag, off, mid) >= i)
        hi = mid;
      else
        lo = mid;
    }
    out.mu(i - 1) = 0.5 * (lo + hi);
    out.sigma_sq(i - 1) = params.sigma2 / out.mu(i - 1);
  }
  return out;
}

Eigen::VectorXd toeplitz_eigenvalues(const SourceParams& params, int n) {
  if (n < 1) throw std::domain_error("toeplitz_eigenvalues: blocklength must be >= 1");
  Eigen::VectorXd xi(n);
  for (int i = 1; i <= n; ++i) xi(i - 1) = g_of_w(params.a, i * kPi / (n + 1));
  return xi;
}

double spectral_average(const SourceParams& params, const std::function<double(double)>& F,
                        std::span<const double> kink_levels, double abs_tol) {
  const double a = params.a;
  std::vector<double> breaks;
  if (a > 0.0) {
    for (double level : kink_levels) {
      if (!(level > 0.0)) continue;
      // S(w) = level  <=>  cos(w) = (1 + a^2 - sigma2/level) / (2a)
      const double c = (1.0 + a * a - params.sigma2 / level) / (2.0 * a);
      if (c > -1.0 && c < 1.0) breaks.push_back(std::acos(c));
    }
  }
  QuadratureOptions opt;
  opt.abs_tol = abs_tol;
  opt.rel_tol = 1e-13;
  auto integrand = [&](double w) { return F(power_spectrum(params, w)); };
  return integrate(integrand, 0.0, kPi, breaks, opt) / kPi;
}

SzegoResult szego_sum(const EigenSpectrum& spectrum, const std::function<double(double)>& F,
                      std::span<const double> kink_levels) {
  double sum = 0.0;
  for (int i = 0; i < spectrum.n; ++i) sum += F(spectrum.sigma_sq(i));
  sum /= spectrum.n;
  const double integral = spectral_average(spectrum.params, F, kink_levels, 1e-11);
  return {sum, integral, std::abs(sum - integral)};
}

}  // namespace gmrd
