#ifndef GMRD_PARAMS_HPP
#define GMRD_PARAMS_HPP

#include <stdexcept>
#include <string>

namespace gmrd {

// Thrown when an iterative numeric routine fails to reach its tolerance.
// CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Gauss-Markov law U_i = a U_{i-1} + Z_i with Z_i ~ N(0, sigma2), U_0 = 0.
// The gain is restricted to [0, 1); the negative-gain case reduces to this
// one by flipping the sign of every other sample.
struct SourceParams {
  double a;
  double sigma2;

  SourceParams(double gain, double innovation_variance)
      : a(gain), sigma2(innovation_variance) {
    if (!(a >= 0.0 && a < 1.0))
      throw std::domain_error("SourceParams: gain must satisfy 0 <= a < 1, got " +
                              std::to_string(gain));
    if (!(sigma2 > 0.0))
      throw std::domain_error("SourceParams: innovation variance must be positive, got " +
                              std::to_string(innovation_variance));
  }

  // Spectrum extrema sigma2/(1+a)^2 and sigma2/(1-a)^2.
  double theta_min() const { return sigma2 / ((1.0 + a) * (1.0 + a)); }
  double theta_max() const { return sigma2 / ((1.0 - a) * (1.0 - a)); }
};

}  // namespace gmrd

#endif  // GMRD_PARAMS_HPP
