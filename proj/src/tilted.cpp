#include "gmrd/tilted.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmrd/estimator.hpp"
#include "gmrd/mc.hpp"

namespace gmrd {

namespace {

// Expected distortion of the CREM optimizer at slope delta.
double expected_distortion(const Eigen::VectorXd& in_vars, const Eigen::VectorXd& out_vars,
                           double delta) {
  double sum = 0.0;
  for (int i = 0; i < in_vars.size(); ++i) {
    const double q = 1.0 + 2.0 * delta * out_vars(i);
    sum += out_vars(i) / q + in_vars(i) / (q * q);
  }
  return sum / in_vars.size();
}

struct MomentAccumulator {
  // Central power sums around a fixed shift; the shift absorbs the bulk of
  // the mean so the fourth powers stay well-scaled.
  double shift = 0.0;
  double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
  std::int64_t count = 0;

  void add(double v) {
    const double c = v - shift;
    const double c2 = c * c;
    s1 += c;
    s2 += c2;
    s3 += c2 * c;
    s4 += c2 * c2;
    ++count;
  }
  void merge(const MomentAccumulator& o) {
    s1 += o.s1;
    s2 += o.s2;
    s3 += o.s3;
    s4 += o.s4;
    count += o.count;
  }
  double mean() const { return shift + s1 / count; }
  double m2() const {
    const double d1 = s1 / count;
    return s2 / count - d1 * d1;
  }
  double m4() const {
    const double d1 = s1 / count;
    return s4 / count - 4.0 * d1 * s3 / count + 6.0 * d1 * d1 * s2 / count - 3.0 * d1 * d1 * d1 * d1;
  }
  double var() const { return m2() * count / (count - 1); }
  double mean_stderr() const { return std::sqrt(m2() / count); }
  double var_stderr() const {
    const double v = m2();
    return std::sqrt(std::max(0.0, m4() - v * v) / count);
  }
};

}  // namespace

double d_tilted_info(const EigenSpectrum& spectrum, double theta_n, const Eigen::VectorXd& x) {
  if (x.size() != spectrum.n)
    throw std::invalid_argument("d_tilted_info: vector length " + std::to_string(x.size()) +
                                " does not match blocklength " + std::to_string(spectrum.n));
  double sum = 0.0;
  for (int i = 0; i < spectrum.n; ++i) {
    const double s = spectrum.sigma_sq(i);
    sum += std::min(theta_n, s) / (2.0 * theta_n) * (x(i) * x(i) / s - 1.0) +
           0.5 * std::log(std::max(theta_n, s) / theta_n);
  }
  return sum;
}

double generalized_tilted_info(const Eigen::VectorXd& nu_sq, const Eigen::VectorXd& x,
                               double delta, double d) {
  if (nu_sq.size() != x.size())
    throw std::invalid_argument("generalized_tilted_info: variance/sample length mismatch");
  const int n = static_cast<int>(x.size());
  double sum = -n * delta * d;
  for (int i = 0; i < n; ++i) {
    const double q = 1.0 + 2.0 * delta * nu_sq(i);
    sum += delta * x(i) * x(i) / q + 0.5 * std::log(q);
  }
  return sum;
}

CremSolution crem_slope_solve(const Eigen::VectorXd& input_vars, const Eigen::VectorXd& output_vars,
                              double d) {
  if (input_vars.size() != output_vars.size())
    throw std::invalid_argument("crem_slope_solve: variance vector length mismatch");
  const int n = static_cast<int>(input_vars.size());
  if (n == 0) throw std::invalid_argument("crem_slope_solve: empty problem");
  if (!(d > 0.0)) throw std::domain_error("crem_slope_solve: d must be positive");

  const double at_zero = expected_distortion(input_vars, output_vars, 0.0);
  if (output_vars.maxCoeff() == 0.0) {
    // Optimizer degenerates to the zero codeword; distortion is flat in delta.
    if (std::abs(at_zero - d) > 1e-12 * std::max(1.0, d))
      throw std::domain_error(
          "crem_slope_solve: all output variances are zero and d != mean input variance (" +
          std::to_string(at_zero) + ")");
    CremSolution sol;
    sol.delta_star = 0.0;
    sol.value = 0.0;
    sol.cond_mean_coeff = Eigen::VectorXd::Zero(n);
    sol.cond_vars = Eigen::VectorXd::Zero(n);
    return sol;
  }
  if (d > at_zero)
    throw std::domain_error("crem_slope_solve: d = " + std::to_string(d) +
                            " exceeds the zero-slope distortion " + std::to_string(at_zero));
  double lo = 0.0, hi = 1.0;
  while (expected_distortion(input_vars, output_vars, hi) > d) {
    hi *= 2.0;
    if (hi > 1e18)
      throw std::domain_error("crem_slope_solve: d = " + std::to_string(d) +
                              " is not reachable; the large-slope limit is " +
                              std::to_string(expected_distortion(input_vars, output_vars, hi)));
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double e = expected_distortion(input_vars, output_vars, mid);
    if (std::abs(e - d) <= 1e-12) {
      lo = hi = mid;
      break;
    }
    if (e > d)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-16 * (1.0 + hi)) break;
  }
  CremSolution sol;
  sol.delta_star = 0.5 * (lo + hi);
  if (std::abs(expected_distortion(input_vars, output_vars, sol.delta_star) - d) > 1e-10)
    throw NumericError("crem_slope_solve: residual above 1e-10");
  sol.cond_mean_coeff.resize(n);
  sol.cond_vars.resize(n);
  double value = -sol.delta_star * d;
  for (int i = 0; i < n; ++i) {
    const double q = 1.0 + 2.0 * sol.delta_star * output_vars(i);
    sol.cond_mean_coeff(i) = 2.0 * sol.delta_star * output_vars(i) / q;
    sol.cond_vars(i) = output_vars(i) / q;
    value += (0.5 * std::log(q) + sol.delta_star * input_vars(i) / q) / n;
  }
  sol.value = value;
  return sol;
}

Eigen::VectorXd conditional_second_moments(const CremSolution& crem, const Eigen::VectorXd& x) {
  if (x.size() != crem.cond_vars.size())
    throw std::invalid_argument("conditional_second_moments: length mismatch");
  Eigen::VectorXd m(x.size());
  for (int i = 0; i < x.size(); ++i) {
    const double bias = (crem.cond_mean_coeff(i) - 1.0) * x(i);
    m(i) = crem.cond_vars(i) + bias * bias;
  }
  return m;
}

double crem_slope_fixed_point(const Eigen::VectorXd& true_vars,
                              const Eigen::VectorXd& perturbed_vars, double d) {
  if (true_vars.size() != perturbed_vars.size())
    throw std::invalid_argument("crem_slope_fixed_point: variance vector length mismatch");
  const int n = static_cast<int>(true_vars.size());
  auto water_level = [n, d](const Eigen::VectorXd& vars) {
    std::vector<double> s(vars.data(), vars.data() + n);
    std::sort(s.begin(), s.end());
    double prefix = 0.0;
    int k = 0;
    for (; k < n; ++k) {
      if ((prefix + (n - k) * s[k]) / n >= d) break;
      prefix += s[k];
    }
    if (k == n)
      throw std::domain_error("crem_slope_fixed_point: d is not reachable for these variances");
    return (k == 0) ? d : (n * d - prefix) / (n - k);
  };
  const double theta_n = water_level(true_vars);
  const double theta_hat = water_level(perturbed_vars);
  std::vector<int> active;
  for (int i = 0; i < n; ++i)
    if (perturbed_vars(i) > theta_hat) active.push_back(i);
  if (active.empty())
    throw std::domain_error("crem_slope_fixed_point: no active coordinates at this distortion");
  double lambda = 1.0 / (2.0 * theta_n);
  for (int iter = 0; iter < 500; ++iter) {
    double num = 0.0, den = 0.0;
    for (int i : active) {
      const double nu = std::max(0.0, true_vars(i) - theta_n);
      const double q = 1.0 + 2.0 * lambda * nu;
      const double w = 1.0 / (q * q);
      num += w;
      den += 2.0 * (perturbed_vars(i) - true_vars(i) + theta_n) * w;
    }
    const double next = num / den;
    const double step = std::abs(next - lambda);
    lambda = next;
    if (step <= 1e-15 * (1.0 + lambda)) return lambda;
  }
  throw NumericError("crem_slope_fixed_point: fixed-point iteration did not converge");
}

Eigen::VectorXd proxy_variances(const SourceParams& params, int n, double a_hat) {
  if (!(std::abs(a_hat) < 1.0))
    throw std::domain_error("proxy_variances: |a_hat| must be < 1, got " + std::to_string(a_hat));
  constexpr double kPi = 3.1415926535897932385;
  Eigen::VectorXd v(n);
  for (int i = 1; i <= n; ++i) v(i - 1) = params.sigma2 / g_of_w(a_hat, i * kPi / (n + 1));
  return v;
}

TypicalSetResult typical_set_member(const SourceParams& params, const Decorrelator& dec, double d,
                                    double alpha, double p, const Eigen::VectorXd& u) {
  const int n = dec.n();
  if (n < 3) throw std::domain_error("typical_set_member: needs n >= 3 so that log log n > 0");
  if (u.size() != n)
    throw std::invalid_argument("typical_set_member: block length does not match decorrelator");
  if (!(alpha > 0.0 && p > 0.0))
    throw std::domain_error("typical_set_member: alpha and p must be positive");

  TypicalSetResult res;
  res.eta_n = std::sqrt(alpha * std::log(std::log(static_cast<double>(n))) / n);

  const Eigen::VectorXd x = decorrelate(dec, u);

  // Normalized even moments against (2k-1)!!.
  for (int k = 1; k <= 3; ++k) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
      sum += std::pow(x(i) * x(i) / dec.spectrum().sigma_sq(i), k);
    res.moment_residuals[k - 1] =
        std::abs(sum / n - static_cast<double>(double_factorial(2 * k - 1))) - 2.0;
  }

  // Gain estimate. A block that is identically zero already failed the
  // moment conditions, so it is reported as a non-member rather than an
  // error; any other vanishing denominator is a genuine degeneracy.
  double den = 0.0;
  for (int i = 0; i + 1 < n; ++i) den += u(i) * u(i);
  if (den == 0.0 && u.isZero(0.0)) {
    res.member = false;
    res.a_hat = std::numeric_limits<double>::quiet_NaN();
    res.estimate_residual = std::numeric_limits<double>::infinity();
    res.mean_distortion_residual = std::numeric_limits<double>::infinity();
    return res;
  }
  res.a_hat = mle_estimate(u);
  res.estimate_residual = std::abs(res.a_hat - params.a) - res.eta_n;

  // Conditional distortion mean under the proxy-input optimizer.
  const WaterfillPoint wf = nth_order_solve(dec.spectrum(), d);
  Eigen::VectorXd nu(n);
  for (int i = 0; i < n; ++i) nu(i) = std::max(0.0, dec.spectrum().sigma_sq(i) - wf.theta);
  if (std::abs(res.a_hat) < 1.0) {
    const Eigen::VectorXd sigma_hat = proxy_variances(params, n, res.a_hat);
    try {
      const CremSolution crem = crem_slope_solve(sigma_hat, nu, d);
      const double mean_m = conditional_second_moments(crem, x).mean();
      res.mean_distortion_residual = std::abs(mean_m - d) - p * res.eta_n;
    } catch (const std::domain_error&) {
      res.mean_distortion_residual = std::numeric_limits<double>::infinity();
    }
  } else {
    res.mean_distortion_residual = std::numeric_limits<double>::infinity();
  }

  res.member = res.estimate_residual <= 0.0 && res.mean_distortion_residual <= 0.0 &&
               res.moment_residuals[0] <= 0.0 && res.moment_residuals[1] <= 0.0 &&
               res.moment_residuals[2] <= 0.0;
  return res;
}

TiltedStats tilted_mc(const EigenSpectrum& spectrum, double d, std::int64_t trials, RngStream rng) {
  if (trials < 100) throw std::domain_error("tilted_mc: need at least 100 trials");
  const WaterfillPoint wf = nth_order_solve(spectrum, d);
  TiltedStats st;
  st.n = spectrum.n;
  st.d = d;
  st.theta_n = wf.theta;
  st.mean_closed = wf.rate * spectrum.n;
  st.var_closed = 0.0;
  for (int i = 0; i < spectrum.n; ++i) {
    const double r = spectrum.sigma_sq(i) / wf.theta;
    st.var_closed += 0.5 * std::min(1.0, r * r);
  }
  Eigen::VectorXd sd = spectrum.sigma_sq.cwiseSqrt();
  MomentAccumulator acc = run_chunked<MomentAccumulator>(
      rng, trials, 512,
      [&](RngStream& sub, std::int64_t count) {
        MomentAccumulator part;
        part.shift = st.mean_closed;
        Eigen::VectorXd x(spectrum.n);
        for (std::int64_t t = 0; t < count; ++t) {
          for (int i = 0; i < spectrum.n; ++i) x(i) = sub.normal(sd(i));
          part.add(d_tilted_info(spectrum, wf.theta, x));
        }
        return part;
      },
      [](MomentAccumulator& into, const MomentAccumulator& part) { into.merge(part); });
  st.mc_count = acc.count;
  st.mc_mean = acc.mean();
  st.mc_var = acc.var();
  st.mc_mean_stderr = acc.mean_stderr();
  st.mc_var_stderr = acc.var_stderr();
  return st;
}

TiltedGapStats tilted_gap_mc(const EigenSpectrum& spectrum, double d, std::int64_t trials,
                             RngStream rng, double tail_u) {
  if (trials < 100) throw std::domain_error("tilted_gap_mc: need at least 100 trials");
  const WaterfillPoint nth = nth_order_solve(spectrum, d);
  const WaterfillPoint lim = limiting_solve_from_d(spectrum.params, d);
  TiltedGapStats st;
  st.n = spectrum.n;
  st.d = d;
  st.theta = lim.theta;
  st.theta_n = nth.theta;
  st.d_n = nth_order_d_from_theta(spectrum, lim.theta);
  st.tail_u = tail_u;

  struct Partial {
    MomentAccumulator acc;
    std::int64_t tail = 0;
  };
  Eigen::VectorXd sd = spectrum.sigma_sq.cwiseSqrt();
  Partial total = run_chunked<Partial>(
      rng, trials, 512,
      [&](RngStream& sub, std::int64_t count) {
        Partial part;
        Eigen::VectorXd x(spectrum.n);
        for (std::int64_t t = 0; t < count; ++t) {
          for (int i = 0; i < spectrum.n; ++i) x(i) = sub.normal(sd(i));
          const double delta =
              d_tilted_info(spectrum, st.theta_n, x) - d_tilted_info(spectrum, st.theta, x);
          part.acc.add(delta);
          if (std::abs(delta) > tail_u) ++part.tail;
        }
        return part;
      },
      [](Partial& into, const Partial& part) {
        into.acc.merge(part.acc);
        into.tail += part.tail;
      });
  st.count = total.acc.count;
  st.mean = total.acc.mean();
  st.var = total.acc.var();
  st.tail_freq = static_cast<double>(total.tail) / trials;
  return st;
}

}  // namespace gmrd
