#ifndef GMRD_TILTED_HPP
#define GMRD_TILTED_HPP

#include <Eigen/Dense>
#include <array>
#include <cstdint>

#include "gmrd/params.hpp"
#include "gmrd/source.hpp"
#include "gmrd/spectrum.hpp"
#include "gmrd/stats.hpp"
#include "gmrd/waterfill.hpp"

namespace gmrd {

// d-tilted information of the decorrelated block x at the water level
// theta_n matched to d:
//   sum_i min(theta_n, s_i)/(2 theta_n) (x_i^2/s_i - 1)
//        + (1/2) log(max(theta_n, s_i)/theta_n),   s_i = sigma_i^2.
double d_tilted_info(const EigenSpectrum& spectrum, double theta_n, const Eigen::VectorXd& x);

// Generalized tilted information for the Gaussian codeword law
// Y ~ N(0, diag(nu_sq)) at slope delta and distortion d:
//   -n delta d + sum_i [ delta x_i^2/(1+2 delta nu_i^2)
//                        + (1/2) log(1+2 delta nu_i^2) ].
double generalized_tilted_info(const Eigen::VectorXd& nu_sq, const Eigen::VectorXd& x,
                               double delta, double d);

// Slope and optimizer moments of the Gaussian conditional relative entropy
// minimization with input variances input_vars, codeword variances
// output_vars, and distortion budget d. cond_mean_coeff(i) * x_i is the
// conditional mean of the optimizer coordinate given X_i = x_i, cond_vars(i)
// its conditional variance.
struct CremSolution {
  double delta_star = 0.0;        // negative slope, >= 0
  double value = 0.0;             // optimal objective, nats per symbol
  Eigen::VectorXd cond_mean_coeff;
  Eigen::VectorXd cond_vars;
};

// Solves (1/n) sum_i [ nu_i^2/(1+2 d* nu_i^2) + s_i/(1+2 d* nu_i^2)^2 ] = d
// (the expected distortion of the optimizer) to a 1e-10 residual; expected
// distortion is nonincreasing in the slope, so a doubling bracket plus
// bisection always lands. Throws std::domain_error when d is not
// bracketable, including the degenerate all-zero output_vars case unless d
// equals the input mean exactly.
CremSolution crem_slope_solve(const Eigen::VectorXd& input_vars, const Eigen::VectorXd& output_vars,
                              double d);

// Conditional second moments m_i(x) = E[(F*_i - x_i)^2 | X_i = x_i] of the
// optimizer, used by the typical-set membership test.
Eigen::VectorXd conditional_second_moments(const CremSolution& crem, const Eigen::VectorXd& x);

// Water-level-anchored slope of the perturbed problem: the fixed point of
//   lambda = sum_A w_i / sum_A 2 (s_hat_i - s_i + theta_n) w_i,
//   w_i = (1 + 2 lambda nu_i^2)^{-2},  A = { i : s_hat_i > theta_hat_n },
// where theta_n / theta_hat_n are the n-th order water levels of the true
// and perturbed variances at distortion d and nu_i^2 = max(0, s_i - theta_n).
// For |s_hat - s| <= t it lies in [1/(2(theta_n+t)), 1/(2(theta_n-t))]; this
// is the quantity the slope-sensitivity bound speaks about. Note it differs
// from crem_slope_solve, whose distortion-matching slope can leave that
// interval when many coordinates are inactive.
double crem_slope_fixed_point(const Eigen::VectorXd& true_vars,
                              const Eigen::VectorXd& perturbed_vars, double d);

// Proxy variances sigma^2 / g_hat(i pi/(n+1)) built from an estimated gain;
// descending in i, mirroring EigenSpectrum::sigma_sq. |a_hat| must be < 1.
Eigen::VectorXd proxy_variances(const SourceParams& params, int n, double a_hat);

// Membership in the estimator-based typical set: the gain estimate, the
// conditional distortion mean, and the normalized moments must all sit near
// their nominal values. Residuals are (quantity - threshold), so a negative
// residual means the condition holds.
struct TypicalSetResult {
  bool member = false;
  double a_hat = 0.0;
  double eta_n = 0.0;
  double estimate_residual = 0.0;              // |a_hat - a| - eta_n
  double mean_distortion_residual = 0.0;       // |mean m_i - d| - p eta_n
  std::array<double, 3> moment_residuals{};    // |moment_k - (2k-1)!!| - 2
};

TypicalSetResult typical_set_member(const SourceParams& params, const Decorrelator& dec, double d,
                                    double alpha, double p, const Eigen::VectorXd& u);

// Closed-form and Monte Carlo moments of the d-tilted information at (n, d).
struct TiltedStats {
  int n = 0;
  double d = 0.0;
  double theta_n = 0.0;
  double mean_closed = 0.0;   // sum of per-coordinate means = n * R(n, d)
  double var_closed = 0.0;    // sum of (1/2) min(1, (sigma_i^2/theta_n)^2)
  double mc_mean = 0.0;
  double mc_var = 0.0;
  std::int64_t mc_count = 0;
  double mc_mean_stderr = 0.0;
  double mc_var_stderr = 0.0;
};

TiltedStats tilted_mc(const EigenSpectrum& spectrum, double d, std::int64_t trials, RngStream rng);

// Sampled gap Delta = j(X, d) - j(X, d_n), where d_n is the distortion
// matched to the limiting water level via the finite spectrum.
struct TiltedGapStats {
  int n = 0;
  double d = 0.0;
  double d_n = 0.0;
  double theta = 0.0;     // limiting water level for d
  double theta_n = 0.0;   // n-th order water level for d
  double mean = 0.0;
  double var = 0.0;
  double tail_u = 0.0;
  double tail_freq = 0.0;  // empirical P[|Delta| > tail_u]
  std::int64_t count = 0;
};

TiltedGapStats tilted_gap_mc(const EigenSpectrum& spectrum, double d, std::int64_t trials,
                             RngStream rng, double tail_u = 0.5);

}  // namespace gmrd

#endif  // GMRD_TILTED_HPP
