#include "gmrd/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "gmrd/params.hpp"

namespace gmrd {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double normal_pdf(double t) { return kInvSqrt2Pi * std::exp(-0.5 * t * t); }

// Regularized lower incomplete gamma P(s, x), series branch (x < s + 1).
double gamma_p_series(double s, double x) {
  double term = 1.0 / s;
  double sum = term;
  for (int k = 1; k < 100000; ++k) {
    term *= x / (s + k);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17)
      return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
  }
  throw NumericError("gamma_p_series: no convergence at s=" + std::to_string(s) +
                     " x=" + std::to_string(x));
}

// Regularized upper incomplete gamma Q(s, x) by Lentz continued fraction.
double gamma_q_cf(double s, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int k = 1; k < 100000; ++k) {
    const double an = -k * (k - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-17)
      return h * std::exp(-x + s * std::log(x) - std::lgamma(s));
  }
  throw NumericError("gamma_q_cf: no convergence at s=" + std::to_string(s) +
                     " x=" + std::to_string(x));
}

double gamma_p(double s, double x) {
  if (x <= 0.0) return 0.0;
  if (x < s + 1.0) return gamma_p_series(s, x);
  return 1.0 - gamma_q_cf(s, x);
}

// Chi-square density, stable for large n via logs.
double chi2_pdf(double x, int n) {
  if (x <= 0.0) return 0.0;
  const double s = 0.5 * n;
  return 0.5 * std::exp((s - 1.0) * std::log(0.5 * x) - 0.5 * x - std::lgamma(s));
}

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t mix_seed_stream(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  s = a ^ (stream * 0xD1342543DE82EF95ULL + 0x2545F4914F6CDD1DULL);
  std::uint64_t b = splitmix64(s);
  return b;
}

}  // namespace

double q_function(double t) { return 0.5 * std::erfc(t / kSqrt2); }

double q_inverse(double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::domain_error("q_inverse: eps must lie in (0,1), got " + std::to_string(eps));
  // Bracketed bisection down to ~1e-3, then Newton to machine accuracy.
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 20; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (q_function(mid) > eps)
      lo = mid;
    else
      hi = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 100; ++i) {
    const double f = q_function(x) - eps;
    const double step = f / normal_pdf(x);
    x += step;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(x))) break;
  }
  return x;
}

double chi2_cdf(double x, int n) {
  if (n < 1) throw std::domain_error("chi2_cdf: degrees of freedom must be >= 1");
  if (x < 0.0) throw std::domain_error("chi2_cdf: x must be nonnegative, got " + std::to_string(x));
  return gamma_p(0.5 * n, 0.5 * x);
}

double chi2_quantile(double p, int n) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("chi2_quantile: p must lie in (0,1), got " + std::to_string(p));
  if (n < 1) throw std::domain_error("chi2_quantile: degrees of freedom must be >= 1");
  double lo = 0.0, hi = static_cast<double>(n);
  while (chi2_cdf(hi, n) < p) hi *= 2.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf(mid, n) < p)
      lo = mid;
    else
      hi = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 50; ++i) {
    const double pdf = chi2_pdf(x, n);
    if (pdf <= 0.0) break;
    const double step = (chi2_cdf(x, n) - p) / pdf;
    x -= step;
    if (x <= lo || x >= hi) {  // Newton left the bracket; bisection value stands
      x = 0.5 * (lo + hi);
      break;
    }
    if (std::abs(step) <= 1e-15 * (1.0 + x)) break;
  }
  return x;
}

long long double_factorial(int k) {
  if (k < -1) throw std::domain_error("double_factorial: argument must be >= -1");
  if (k > 33) throw std::overflow_error("double_factorial: result exceeds 64 bits");
  long long r = 1;
  for (int v = k; v > 1; v -= 2) r *= v;
  return r;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_(stream_id), gen_(mix_seed_stream(seed, stream_id)) {}

double RngStream::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = 1.0 - uniform();  // (0,1], keeps log finite
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double w = 6.2831853071795864769 * u2;
  cached_ = r * std::sin(w);
  has_cached_ = true;
  return r * std::cos(w);
}

RngStream RngStream::substream(std::uint64_t index) const {
  // Children occupy a stream-id space keyed off the parent id.
  std::uint64_t s = stream_ ^ (0xA0761D6478BD642FULL + index * 0xE7037ED1A0B428DBULL);
  std::uint64_t child = splitmix64(s);
  return RngStream(seed_, child);
}

}  // namespace gmrd
