#ifndef GMRD_ESTIMATOR_HPP
#define GMRD_ESTIMATOR_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gmrd/params.hpp"
#include "gmrd/stats.hpp"

namespace gmrd {

// Maximum-likelihood estimate of the gain:
//   a_hat(u) = sum_{i<n} u_i u_{i+1} / sum_{i<n} u_i^2.
// Not clamped; callers that feed it into proxy variances must handle
// out-of-range estimates. Throws std::domain_error when the denominator
// vanishes or the block is shorter than 2.
double mle_estimate(const Eigen::VectorXd& u);

// Symmetric matrix Q(n, eta) with Z^T Q Z = sum_{i<n} (U_i Z_{i+1} - eta U_i^2),
// or its sign-flipped companion S(n, eta) for the lower tail. trace and
// frob_sq are cached from the entries; op_norm_bound is the Gershgorin
// max-row-1-norm bound on ||Q||.
struct QuadraticForm {
  int n;
  double eta;
  Eigen::MatrixXd entries;
  double trace;
  double frob_sq;
  double op_norm_bound;
};

QuadraticForm build_Q(const SourceParams& params, int n, double eta);
QuadraticForm build_S(const SourceParams& params, int n, double eta);

// Closed forms used by the error envelope (all from the same computation
// that produces Q):
//   trace:  sigma^2 tr Q = -eta sigma^2 n/(1-a^2) + eta sigma^2 (1-a^{2n})/(1-a^2)^2
//   frob:   ||Q||_F^2 exactly, polynomial in n, a^{2n}, a^{4n}
double trace_Q_closed(const SourceParams& params, int n, double eta);
double frob_sq_Q_closed(const SourceParams& params, int n, double eta);

// Constants of the concentration envelope.
double hw_K1(const SourceParams& params);               // 1/(2(1-a^2))
double hw_K2_prime(const SourceParams& params);         // eta-free bound on K2
double hw_K3_prime(const SourceParams& params);         // eta-free bound on K3
double hw_K3(const SourceParams& params, double eta);   // 1/(1-a) + eta/(1-a^2) + 2 eta/(1-a)^2
double hw_c1(const SourceParams& params);               // K1^2 / K2'
double hw_c2(const SourceParams& params);               // K1 / K3'
double hw_kappa(const SourceParams& params, double c);  // c / (8(1-a^2))

// 2 exp[-c min(c1 eta^2 n, c2 eta n)], clamped to [0,1]. eta must lie in (0,1).
double hw_envelope(const SourceParams& params, int n, double eta, double c);

// Max over sampled Z of |W_recursion - Z^T Q Z| / (1 + |W|); the two
// evaluation routes must agree to 1e-9 relative.
double quadratic_identity_check(const SourceParams& params, int n, double eta, RngStream& rng,
                                std::int64_t trials);

struct MleExperimentReport {
  std::int64_t n;
  double eta;           // threshold actually used (eta_n in alpha mode)
  std::int64_t trials;
  double exceed_freq;   // empirical P[|a_hat - a| > eta]
  double wilson_lo;     // 95% Wilson interval
  double wilson_hi;
  double envelope;      // hw_envelope, or 2/(log n)^{kappa alpha} in alpha mode
  double k1, k2p, k3p, c1, c2;
};

// Fixed threshold eta for every n.
std::vector<MleExperimentReport> mle_error_experiment(const SourceParams& params,
                                                      const std::vector<std::int64_t>& n_list,
                                                      double eta, std::int64_t trials, double c,
                                                      RngStream rng);

// Shrinking threshold eta_n = sqrt(alpha log log n / n); requires n >= 3.
std::vector<MleExperimentReport> mle_error_experiment_alpha(const SourceParams& params,
                                                            const std::vector<std::int64_t>& n_list,
                                                            double alpha, std::int64_t trials,
                                                            double c, RngStream rng);

}  // namespace gmrd

#endif  // GMRD_ESTIMATOR_HPP
