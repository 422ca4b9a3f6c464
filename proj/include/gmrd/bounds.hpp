#ifndef GMRD_BOUNDS_HPP
#define GMRD_BOUNDS_HPP

#include <cstdint>
#include <utility>

#include "gmrd/params.hpp"
#include "gmrd/spectrum.hpp"
#include "gmrd/stats.hpp"

namespace gmrd {

// Second-order (Gaussian) approximation R(d) + sqrt(V(d)/n) Q^{-1}(eps).
double gaussian_approx_rate(const SourceParams& params, double d, double eps, std::int64_t n);

// Volumetric converse: with r such that P[chi2_n < n r / sigma^2] = 1 - eps,
// any code needs M >= (r/d)^{n/2}, i.e. rate >= max(0, (1/2) log(r/d)).
// The value does not depend on the gain.
double geometric_converse_rate(const SourceParams& params, double d, double eps, std::int64_t n);

// Info-spectrum converse eps >= P[j(X, d) >= log M + gamma] - exp(-gamma),
// estimated by Monte Carlo over the decorrelated source.
struct ConverseEpsBound {
  double eps_lower = 0.0;
  double stderr_est = 0.0;
  bool clamped = false;  // negative estimate clipped at zero
};

ConverseEpsBound general_converse_eps(const EigenSpectrum& spectrum, double d, double log_M,
                                      double gamma, std::int64_t trials, RngStream rng);

// Excess-distortion probability of a fresh random codebook of M codewords
// drawn from the rate-distortion-achieving output law, nearest-codeword
// encoding. Desk scale only: n <= 16, M <= 2^20.
struct RandomCodeResult {
  std::int64_t m = 0;
  double eps_hat = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
  std::int64_t trials = 0;
};

RandomCodeResult simulate_random_code(const EigenSpectrum& spectrum, double d, std::int64_t m,
                                      std::int64_t trials, RngStream rng);

// (R_Z(d), V_Z(d)) = (max(0, (1/2) log(sigma^2/d)), 1/2) of the innovation.
std::pair<double, double> iid_reference(const SourceParams& params, double d);

}  // namespace gmrd

#endif  // GMRD_BOUNDS_HPP
