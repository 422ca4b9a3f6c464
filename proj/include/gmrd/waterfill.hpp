#ifndef GMRD_WATERFILL_HPP
#define GMRD_WATERFILL_HPP

#include "gmrd/params.hpp"
#include "gmrd/spectrum.hpp"

namespace gmrd {

// A matched (d, theta, rate) tuple from reverse waterfilling. For limiting
// solutions n == 0 and active_count == -1; for n-th order solutions the
// dispersion field is NaN (the dispersion is a property of the limit).
struct WaterfillPoint {
  double d = 0.0;
  double theta = 0.0;
  double rate = 0.0;        // nats per symbol
  double dispersion = 0.0;  // nats^2 per symbol, limiting only
  int n = 0;                // 0 marks a limiting solution
  int active_count = -1;    // coordinates with sigma_i^2 > theta, n-th order only
};

struct CriticalPoints {
  double d_c;         // sigma^2 / (1+a)^2, equals theta_min
  double d_max;       // sigma^2 / (1-a^2), the stationary variance
  double theta_min;
  double theta_max;
  double p1_d, p1_v;  // (d_c, 1/2)
  double p2_d, p2_v;  // (d_max, (1+a^2)(1-a) / (2(1+a)^3))
};

CriticalPoints critical_points(const SourceParams& params);

// Closed form of (1/2pi) * integral of S(w)^2 dw: sigma^4 (1+a^2)/(1-a^2)^3.
double spectrum_sq_mean_closed(const SourceParams& params);

// Limiting reverse waterfilling: theta solves
//   d = (1/2pi) int min(theta, S(w)) dw
// by monotone bisection to a 1e-12 residual (theta = d exactly for d <= d_c);
// rate and dispersion follow by kink-aware quadrature. Requires
// 0 < d < d_max; d = d_max is rejected because theta is not unique there —
// use limiting_solve_from_theta for the vertical segment.
WaterfillPoint limiting_solve_from_d(const SourceParams& params, double d);

// Same curve parametrized by the water level; valid for any theta > 0. For
// theta >= theta_max, d = d_max and the dispersion keeps decreasing as
// (1/(4 pi theta^2)) * integral of S(w)^2 dw.
WaterfillPoint limiting_solve_from_theta(const SourceParams& params, double theta);

// n-th order reverse waterfilling over the exact eigenvalues: theta_n with
//   d = (1/n) sum min(theta_n, sigma_i^2)
// solved exactly from the sorted piecewise-linear structure. Ties
// sigma_i^2 == theta_n count as inactive. Requires 0 < d < mean(sigma_i^2).
WaterfillPoint nth_order_solve(const EigenSpectrum& spectrum, double d);

// d_n = (1/n) sum min(theta, sigma_i^2) for a given water level.
double nth_order_d_from_theta(const EigenSpectrum& spectrum, double theta);

}  // namespace gmrd

#endif  // GMRD_WATERFILL_HPP
