#ifndef GMRD_QUADRATURE_HPP
#define GMRD_QUADRATURE_HPP

#include <functional>
#include <span>

namespace gmrd {

struct QuadratureOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-13;
  int max_panels = 200000;
};

// Adaptive Gauss-Kronrod 15(7) on [a, b]. Throws NumericError with the
// achieved error when the panel budget runs out before the tolerance is met.
double integrate(const std::function<double(double)>& f, double a, double b,
                 QuadratureOptions opt = {});

// Same, but the interval is first split at the given interior breakpoints
// (kinks of the integrand belong on panel boundaries). Points outside (a, b)
// are ignored.
double integrate(const std::function<double(double)>& f, double a, double b,
                 std::span<const double> interior_breakpoints,
                 QuadratureOptions opt = {});

}  // namespace gmrd

#endif  // GMRD_QUADRATURE_HPP
