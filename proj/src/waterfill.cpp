#include "gmrd/waterfill.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace gmrd {

namespace {

double rate_integral(const SourceParams& params, double theta) {
  const double kink[1] = {theta};
  return spectral_average(
      params, [&](double s) { return std::max(0.0, 0.5 * std::log(s / theta)); }, kink);
}

double dispersion_integral(const SourceParams& params, double theta) {
  const double kink[1] = {theta};
  return 0.5 * spectral_average(
                   params,
                   [&](double s) {
                     const double r = s / theta;
                     return std::min(1.0, r * r);
                   },
                   kink);
}

double distortion_integral(const SourceParams& params, double theta) {
  const double kink[1] = {theta};
  return spectral_average(params, [&](double s) { return std::min(theta, s); }, kink);
}

}  // namespace

CriticalPoints critical_points(const SourceParams& params) {
  const double a = params.a;
  CriticalPoints cp{};
  cp.theta_min = params.theta_min();
  cp.theta_max = params.theta_max();
  cp.d_c = cp.theta_min;
  cp.d_max = params.sigma2 / (1.0 - a * a);
  cp.p1_d = cp.d_c;
  cp.p1_v = 0.5;
  cp.p2_d = cp.d_max;
  cp.p2_v = (1.0 + a * a) * (1.0 - a) / (2.0 * (1.0 + a) * (1.0 + a) * (1.0 + a));
  return cp;
}

double spectrum_sq_mean_closed(const SourceParams& params) {
  const double a2 = params.a * params.a;
  const double one = 1.0 - a2;
  return params.sigma2 * params.sigma2 * (1.0 + a2) / (one * one * one);
}

WaterfillPoint limiting_solve_from_d(const SourceParams& params, double d) {
  const CriticalPoints cp = critical_points(params);
  if (!(d > 0.0 && d < cp.d_max))
    throw std::domain_error("limiting_solve_from_d: d must lie in (0, d_max) with d_max = " +
                            std::to_string(cp.d_max) + ", got " + std::to_string(d));
  double theta;
  if (d <= cp.d_c) {
    theta = d;  // below the spectrum floor the water level equals the distortion
  } else {
    double lo = cp.theta_min, hi = cp.theta_max;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      const double dm = distortion_integral(params, mid);
      if (std::abs(dm - d) <= 1e-13) {
        lo = hi = mid;
        break;
      }
      if (dm < d)
        lo = mid;
      else
        hi = mid;
      if (hi - lo <= 1e-15 * hi) break;
    }
    theta = 0.5 * (lo + hi);
    if (std::abs(distortion_integral(params, theta) - d) > 1e-10)
      throw NumericError("limiting_solve_from_d: bisection residual above 1e-10 at d = " +
                         std::to_string(d));
  }
  WaterfillPoint pt;
  pt.d = d;
  pt.theta = theta;
  pt.rate = rate_integral(params, theta);
  pt.dispersion = dispersion_integral(params, theta);
  pt.n = 0;
  pt.active_count = -1;
  return pt;
}

WaterfillPoint limiting_solve_from_theta(const SourceParams& params, double theta) {
  if (!(theta > 0.0))
    throw std::domain_error("limiting_solve_from_theta: theta must be positive");
  const CriticalPoints cp = critical_points(params);
  WaterfillPoint pt;
  pt.theta = theta;
  pt.d = std::min(distortion_integral(params, theta), cp.d_max);
  pt.rate = theta >= cp.theta_max ? 0.0 : rate_integral(params, theta);
  pt.dispersion = dispersion_integral(params, theta);
  pt.n = 0;
  pt.active_count = -1;
  return pt;
}

WaterfillPoint nth_order_solve(const EigenSpectrum& spectrum, double d) {
  const int n = spectrum.n;
  std::vector<double> s(spectrum.sigma_sq.data(), spectrum.sigma_sq.data() + n);
  std::sort(s.begin(), s.end());
  double total = 0.0;
  for (double v : s) total += v;
  const double mean_var = total / n;
  if (!(d > 0.0 && d < mean_var))
    throw std::domain_error("nth_order_solve: d must lie in (0, " + std::to_string(mean_var) +
                            ") at n = " + std::to_string(n) + ", got " + std::to_string(d));
  // d(theta) is piecewise linear with breakpoints at the sorted variances:
  // on [s_k, s_{k+1}], n*d = (s_1+...+s_k) + (n-k)*theta. Locate the first
  // breakpoint whose distortion reaches d, then solve that segment.
  double prefix = 0.0;
  int k = 0;
  for (; k < n; ++k) {
    const double d_at_break = (prefix + (n - k) * s[k]) / n;
    if (d_at_break >= d) break;
    prefix += s[k];
  }
  if (k == n) {
    k = n - 1;  // d < mean_var guarantees this is unreachable up to roundoff
    prefix -= s[k];
  }
  // k == 0 means every coordinate is active and theta equals d exactly.
  const double theta = (k == 0) ? d : (n * d - prefix) / (n - k);
  WaterfillPoint pt;
  pt.n = n;
  pt.d = d;
  pt.theta = theta;
  pt.dispersion = std::numeric_limits<double>::quiet_NaN();
  pt.active_count = 0;
  double rate = 0.0;
  for (int i = 0; i < n; ++i) {
    if (spectrum.sigma_sq(i) > theta) {
      ++pt.active_count;
      rate += 0.5 * std::log(spectrum.sigma_sq(i) / theta);
    }
  }
  pt.rate = rate / n;
  return pt;
}

double nth_order_d_from_theta(const EigenSpectrum& spectrum, double theta) {
  if (!(theta > 0.0))
    throw std::domain_error("nth_order_d_from_theta: theta must be positive");
  double sum = 0.0;
  for (int i = 0; i < spectrum.n; ++i) sum += std::min(theta, spectrum.sigma_sq(i));
  return sum / spectrum.n;
}

}  // namespace gmrd
