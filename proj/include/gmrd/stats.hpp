#ifndef GMRD_STATS_HPP
#define GMRD_STATS_HPP

#include <cstdint>
#include <random>

namespace gmrd {

/// Gaussian tail probability P[N(0,1) > t].
double q_function(double t);

/// Inverse of q_function on (0,1). Throws std::domain_error outside (0,1).
double q_inverse(double eps);

/// Chi-square CDF with n degrees of freedom, i.e. the regularized lower
/// incomplete gamma P(n/2, x/2). Throws std::domain_error for x < 0.
double chi2_cdf(double x, int n);

/// Inverse chi-square CDF: chi2_cdf(chi2_quantile(p, n), n) == p to 1e-10.
double chi2_quantile(double p, int n);

/// k!! with the empty-product conventions (-1)!! = 0!! = 1.
long long double_factorial(int k);

// Deterministic stream of pseudo-random numbers. The (seed, stream_id) pair
// fully determines the sequence, and distinct stream ids give independent
// streams, so parallel Monte Carlo merges reproducibly for any worker count.
// Uniform and normal variates are generated from raw 64-bit draws directly
// (no std::*_distribution), keeping the sequence portable across libraries.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; the companion variate is cached.
  double normal();
  double normal(double stddev) { return stddev * normal(); }

  /// Child stream for chunked Monte Carlo; deterministic in (parent, index).
  RngStream substream(std::uint64_t index) const;

  std::uint64_t seed_value() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 gen_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace gmrd

#endif  // GMRD_STATS_HPP
