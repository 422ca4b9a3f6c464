#ifndef GMRD_SPECTRUM_HPP
#define GMRD_SPECTRUM_HPP

#include <Eigen/Dense>
#include <functional>
#include <span>

#include "gmrd/params.hpp"

namespace gmrd {

// Symbol of the tridiagonal form: g(w) = 1 + a^2 - 2 a cos(w), increasing on
// [0, pi] with range [(1-a)^2, (1+a)^2].
double g_of_w(double a, double w);

// Power spectrum S(w) = sigma^2 / g(w) of the Gauss-Markov source.
double power_spectrum(const SourceParams& params, double w);

// Eigenstructure of B_n = A^T A at blocklength n. B_n is symmetric
// tridiagonal with diagonal (1+a^2, ..., 1+a^2, 1) and off-diagonal -a.
// mu is ascending, so sigma_sq(i) = sigma^2 / mu(i) is descending, and the
// Toeplitz surrogate eigenvalues xi(i) = g(i*pi/(n+1)) are ascending with
// 0 <= xi(i) - mu(i) <= 2*a*pi/n.
struct EigenSpectrum {
  SourceParams params;
  int n = 0;
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma_sq;
  Eigen::VectorXd xi;
};

// All n eigenvalues of B_n by Sturm-sequence bisection, each accurate to
// 1e-12 absolute.
EigenSpectrum exact_eigenvalues(const SourceParams& params, int n);

// Just the Toeplitz surrogates xi_i, ascending by construction.
Eigen::VectorXd toeplitz_eigenvalues(const SourceParams& params, int n);

// (1/2pi) * integral of F(S(w)) dw over [-pi, pi], by even symmetry taken on
// [0, pi]. kink_levels lists spectrum values t where F(t) has a kink; the
// matching angles become quadrature panel boundaries.
double spectral_average(const SourceParams& params, const std::function<double(double)>& F,
                        std::span<const double> kink_levels = {},
                        double abs_tol = 1e-13);

struct SzegoResult {
  double finite_sum;  // (1/n) sum of F(sigma_i^2)
  double integral;    // (1/2pi) integral of F(S(w)) dw
  double gap;         // |finite_sum - integral|
};

// Finite eigenvalue average of F against its spectral limit.
SzegoResult szego_sum(const EigenSpectrum& spectrum, const std::function<double(double)>& F,
                      std::span<const double> kink_levels = {});

}  // namespace gmrd

#endif  // GMRD_SPECTRUM_HPP
