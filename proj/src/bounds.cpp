#include "gmrd/bounds.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gmrd/mc.hpp"
#include "gmrd/tilted.hpp"
#include "gmrd/waterfill.hpp"

namespace gmrd {

namespace {

double wilson(double p_hat, std::int64_t trials, bool upper) {
  const double z = 1.959963984540054;
  const double nb = static_cast<double>(trials);
  const double z2 = z * z;
  const double center = p_hat + z2 / (2.0 * nb);
  const double half = z * std::sqrt(p_hat * (1.0 - p_hat) / nb + z2 / (4.0 * nb * nb));
  return (center + (upper ? half : -half)) / (1.0 + z2 / nb);
}

}  // namespace

double gaussian_approx_rate(const SourceParams& params, double d, double eps, std::int64_t n) {
  if (n < 1) throw std::domain_error("gaussian_approx_rate: n must be >= 1");
  const WaterfillPoint wf = limiting_solve_from_d(params, d);
  return wf.rate + std::sqrt(wf.dispersion / static_cast<double>(n)) * q_inverse(eps);
}

double geometric_converse_rate(const SourceParams& params, double d, double eps, std::int64_t n) {
  if (n < 1) throw std::domain_error("geometric_converse_rate: n must be >= 1");
  if (!(d > 0.0)) throw std::domain_error("geometric_converse_rate: d must be positive");
  const double r =
      params.sigma2 * chi2_quantile(1.0 - eps, static_cast<int>(n)) / static_cast<double>(n);
  return r > d ? 0.5 * std::log(r / d) : 0.0;
}

ConverseEpsBound general_converse_eps(const EigenSpectrum& spectrum, double d, double log_M,
                                      double gamma, std::int64_t trials, RngStream rng) {
  if (trials < 1000) throw std::domain_error("general_converse_eps: need at least 10^3 trials");
  const WaterfillPoint wf = nth_order_solve(spectrum, d);
  const double threshold = log_M + gamma;
  Eigen::VectorXd sd = spectrum.sigma_sq.cwiseSqrt();
  struct Counts {
    std::int64_t hits = 0;
  };
  Counts total = run_chunked<Counts>(
      rng, trials, 1024,
      [&](RngStream& sub, std::int64_t count) {
        Counts c;
        Eigen::VectorXd x(spectrum.n);
        for (std::int64_t t = 0; t < count; ++t) {
          for (int i = 0; i < spectrum.n; ++i) x(i) = sub.normal(sd(i));
          if (d_tilted_info(spectrum, wf.theta, x) >= threshold) ++c.hits;
        }
        return c;
      },
      [](Counts& into, const Counts& part) { into.hits += part.hits; });
  const double p_hat = static_cast<double>(total.hits) / trials;
  ConverseEpsBound out;
  out.stderr_est = std::sqrt(p_hat * (1.0 - p_hat) / trials);
  const double raw = p_hat - std::exp(-gamma);
  out.clamped = raw < 0.0;
  out.eps_lower = out.clamped ? 0.0 : raw;
  return out;
}

RandomCodeResult simulate_random_code(const EigenSpectrum& spectrum, double d, std::int64_t m,
                                      std::int64_t trials, RngStream rng) {
  if (spectrum.n > 16 || m > (1 << 20))
    throw std::invalid_argument("simulate_random_code: desk-scale caps are n <= 16, M <= 2^20 (got n=" +
                                std::to_string(spectrum.n) + ", M=" + std::to_string(m) + ")");
  if (m < 1) throw std::invalid_argument("simulate_random_code: M must be >= 1");
  if (trials < 1000) throw std::domain_error("simulate_random_code: need at least 10^3 trials");
  const int n = spectrum.n;
  const WaterfillPoint wf = nth_order_solve(spectrum, d);
  Eigen::VectorXd code_sd(n), src_sd(n);
  for (int i = 0; i < n; ++i) {
    code_sd(i) = std::sqrt(std::max(0.0, spectrum.sigma_sq(i) - wf.theta));
    src_sd(i) = std::sqrt(spectrum.sigma_sq(i));
  }
  struct Counts {
    std::int64_t exceed = 0;
  };
  Counts total = run_chunked<Counts>(
      rng, trials, 64,
      [&](RngStream& sub, std::int64_t count) {
        Counts c;
        Eigen::MatrixXd codebook(m, n);
        Eigen::VectorXd x(n);
        for (std::int64_t t = 0; t < count; ++t) {
          // Fresh codebook per trial, matching the expectation in the bound.
          for (std::int64_t r = 0; r < m; ++r)
            for (int i = 0; i < n; ++i) codebook(r, i) = sub.normal(code_sd(i));
          for (int i = 0; i < n; ++i) x(i) = sub.normal(src_sd(i));
          const Eigen::VectorXd scores =
              codebook.rowwise().squaredNorm() - 2.0 * (codebook * x);
          Eigen::Index best;
          scores.minCoeff(&best);
          const double dist = (codebook.row(best).transpose() - x).squaredNorm() / n;
          if (dist > d) ++c.exceed;
        }
        return c;
      },
      [](Counts& into, const Counts& part) { into.exceed += part.exceed; });
  RandomCodeResult out;
  out.m = m;
  out.trials = trials;
  out.eps_hat = static_cast<double>(total.exceed) / trials;
  out.wilson_lo = wilson(out.eps_hat, trials, false);
  out.wilson_hi = wilson(out.eps_hat, trials, true);
  return out;
}

std::pair<double, double> iid_reference(const SourceParams& params, double d) {
  if (!(d > 0.0)) throw std::domain_error("iid_reference: d must be positive");
  return {std::max(0.0, 0.5 * std::log(params.sigma2 / d)), 0.5};
}

}  // namespace gmrd
