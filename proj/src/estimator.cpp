#include "gmrd/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gmrd/mc.hpp"
#include "gmrd/source.hpp"

namespace gmrd {

namespace {

QuadraticForm build_quadratic(const SourceParams& params, int n, double eta, double cross_sign) {
  if (n < 2) throw std::domain_error("build_Q: n must be >= 2");
  if (!(eta > 0.0)) throw std::domain_error("build_Q: eta must be positive");
  const double a = params.a;
  const double one = 1.0 - a * a;
  QuadraticForm q{n, eta, Eigen::MatrixXd::Zero(n, n), 0.0, 0.0, 0.0};
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      double v;
      if (i == j) {
        v = (i == n) ? 0.0 : -eta * (1.0 - std::pow(a, 2.0 * (n - i))) / one;
      } else {
        const int k = std::abs(i - j);
        v = cross_sign * 0.5 * std::pow(a, k - 1) -
            eta * (std::pow(a, k) - std::pow(a, 2 * n - i - j)) / one;
      }
      q.entries(i - 1, j - 1) = v;
    }
  }
  q.trace = q.entries.trace();
  q.frob_sq = q.entries.squaredNorm();
  q.op_norm_bound = q.entries.cwiseAbs().rowwise().sum().maxCoeff();
  return q;
}

double wilson_bound(double p_hat, std::int64_t trials, double z, bool upper) {
  const double nb = static_cast<double>(trials);
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nb;
  const double center = p_hat + z2 / (2.0 * nb);
  const double half = z * std::sqrt(p_hat * (1.0 - p_hat) / nb + z2 / (4.0 * nb * nb));
  return (center + (upper ? half : -half)) / denom;
}

MleExperimentReport run_mle_point(const SourceParams& params, std::int64_t n, double threshold,
                                  std::int64_t trials, double envelope, const RngStream& rng) {
  struct Counts {
    std::int64_t exceed = 0;
  };
  Counts total = run_chunked<Counts>(
      rng, trials, 1024,
      [&](RngStream& sub, std::int64_t count) {
        Counts c;
        for (std::int64_t t = 0; t < count; ++t) {
          const Eigen::VectorXd u = sample_block(params, static_cast<int>(n), sub);
          if (std::abs(mle_estimate(u) - params.a) > threshold) ++c.exceed;
        }
        return c;
      },
      [](Counts& into, const Counts& part) { into.exceed += part.exceed; });
  MleExperimentReport rep{};
  rep.n = n;
  rep.eta = threshold;
  rep.trials = trials;
  rep.exceed_freq = static_cast<double>(total.exceed) / trials;
  rep.wilson_lo = wilson_bound(rep.exceed_freq, trials, 1.959963984540054, false);
  rep.wilson_hi = wilson_bound(rep.exceed_freq, trials, 1.959963984540054, true);
  rep.envelope = envelope;
  rep.k1 = hw_K1(params);
  rep.k2p = hw_K2_prime(params);
  rep.k3p = hw_K3_prime(params);
  rep.c1 = hw_c1(params);
  rep.c2 = hw_c2(params);
  return rep;
}

}  // namespace

double mle_estimate(const Eigen::VectorXd& u) {
  const int n = static_cast<int>(u.size());
  if (n < 2) throw std::domain_error("mle_estimate: block must have length >= 2");
  double num = 0.0, den = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    num += u(i) * u(i + 1);
    den += u(i) * u(i);
  }
  if (den == 0.0)
    throw std::domain_error("mle_estimate: degenerate input, sum of squares of u_1..u_{n-1} is 0");
  return num / den;
}

QuadraticForm build_Q(const SourceParams& params, int n, double eta) {
  return build_quadratic(params, n, eta, +1.0);
}

QuadraticForm build_S(const SourceParams& params, int n, double eta) {
  return build_quadratic(params, n, eta, -1.0);
}

double trace_Q_closed(const SourceParams& params, int n, double eta) {
  const double a = params.a;
  const double one = 1.0 - a * a;
  return -eta * n / one + eta * (1.0 - std::pow(a, 2.0 * n)) / (one * one);
}

double frob_sq_Q_closed(const SourceParams& params, int n, double eta) {
  const double a = params.a;
  const double one = 1.0 - a * a;
  const double one2 = one * one, one3 = one2 * one, one4 = one3 * one;
  const double a2n = std::pow(a, 2.0 * n);
  const double a4n = a2n * a2n;
  // a^{2n}/a appears in the linear-in-n coefficient; written as a^{2n-1} so
  // the a = 0 case stays finite.
  const double a2n_over_a = std::pow(a, 2.0 * n - 1.0);
  const double linear = 1.0 / (2.0 * one) + ((1.0 + a * a) * eta * eta - 2.0 * a * one * eta) / one3 +
                        (4.0 * a * eta * eta - 2.0 * one * eta) * a2n_over_a / one3;
  return linear * n + 4.0 * a * eta / one3 - 1.0 / (2.0 * one2) -
         eta * eta * (4.0 * a * a + 1.0) / one4 +
         (4.0 * a * a * eta * eta / one4 + 1.0 / (2.0 * one2) - 4.0 * a * eta / one3) * a2n +
         eta * eta / one4 * a4n;
}

double hw_K1(const SourceParams& params) { return 1.0 / (2.0 * (1.0 - params.a * params.a)); }

double hw_K2_prime(const SourceParams& params) {
  const double a = params.a;
  const double one = 1.0 - a * a;
  return 1.0 / one + 2.0 * (5.0 + a * a) / (one * one * one);
}

double hw_K3_prime(const SourceParams& params) {
  const double a = params.a;
  return (a + 4.0) / ((1.0 - a) * (1.0 - a) * (1.0 + a));
}

double hw_K3(const SourceParams& params, double eta) {
  const double a = params.a;
  return 1.0 / (1.0 - a) + eta / (1.0 - a * a) + 2.0 * eta / ((1.0 - a) * (1.0 - a));
}

double hw_c1(const SourceParams& params) {
  const double k1 = hw_K1(params);
  return k1 * k1 / hw_K2_prime(params);
}

double hw_c2(const SourceParams& params) { return hw_K1(params) / hw_K3_prime(params); }

double hw_kappa(const SourceParams& params, double c) {
  return c / (8.0 * (1.0 - params.a * params.a));
}

double hw_envelope(const SourceParams& params, int n, double eta, double c) {
  if (!(eta > 0.0 && eta < 1.0))
    throw std::domain_error("hw_envelope: eta must lie in (0,1), got " + std::to_string(eta));
  if (!(c > 0.0)) throw std::domain_error("hw_envelope: c must be positive");
  const double expo = c * std::min(hw_c1(params) * eta * eta * n, hw_c2(params) * eta * n);
  return std::clamp(2.0 * std::exp(-expo), 0.0, 1.0);
}

double quadratic_identity_check(const SourceParams& params, int n, double eta, RngStream& rng,
                                std::int64_t trials) {
  const QuadraticForm q = build_Q(params, n, eta);
  const double sd = std::sqrt(params.sigma2);
  double worst = 0.0;
  Eigen::VectorXd z(n), u(n);
  for (std::int64_t t = 0; t < trials; ++t) {
    for (int i = 0; i < n; ++i) z(i) = rng.normal(sd);
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
      prev = params.a * prev + z(i);
      u(i) = prev;
    }
    double w_def = 0.0;
    for (int i = 0; i + 1 < n; ++i) w_def += u(i) * z(i + 1) - eta * u(i) * u(i);
    const double w_quad = z.dot(q.entries * z);
    worst = std::max(worst, std::abs(w_def - w_quad) / (1.0 + std::abs(w_def)));
  }
  return worst;
}

std::vector<MleExperimentReport> mle_error_experiment(const SourceParams& params,
                                                      const std::vector<std::int64_t>& n_list,
                                                      double eta, std::int64_t trials, double c,
                                                      RngStream rng) {
  if (trials < 1000) throw std::domain_error("mle_error_experiment: need at least 10^3 trials");
  std::vector<MleExperimentReport> out;
  std::uint64_t salt = 0;
  for (std::int64_t n : n_list) {
    if (n < 2) throw std::domain_error("mle_error_experiment: blocklengths must be >= 2");
    out.push_back(run_mle_point(params, n, eta, trials,
                                hw_envelope(params, static_cast<int>(n), eta, c),
                                rng.substream(0x10000 + salt++)));
  }
  return out;
}

std::vector<MleExperimentReport> mle_error_experiment_alpha(const SourceParams& params,
                                                            const std::vector<std::int64_t>& n_list,
                                                            double alpha, std::int64_t trials,
                                                            double c, RngStream rng) {
  if (trials < 1000) throw std::domain_error("mle_error_experiment: need at least 10^3 trials");
  std::vector<MleExperimentReport> out;
  std::uint64_t salt = 0;
  for (std::int64_t n : n_list) {
    if (n < 3) throw std::domain_error("mle_error_experiment: alpha mode needs n >= 3");
    const double eta_n = std::sqrt(alpha * std::log(std::log(static_cast<double>(n))) / n);
    const double envelope =
        std::clamp(2.0 / std::pow(std::log(static_cast<double>(n)), hw_kappa(params, c) * alpha),
                   0.0, 1.0);
    out.push_back(run_mle_point(params, n, eta_n, trials, envelope, rng.substream(0x20000 + salt++)));
  }
  return out;
}

}  // namespace gmrd
