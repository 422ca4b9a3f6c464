#include "gmrd/source.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gmrd {

namespace {

// Solve (T - shift I) x = b for symmetric tridiagonal T = (diag, off), by LU
// with partial pivoting (one superdiagonal of fill-in).
Eigen::VectorXd solve_shifted_tridiagonal(const Eigen::VectorXd& diag, const Eigen::VectorXd& off,
                                          double shift, Eigen::VectorXd b) {
  const int n = static_cast<int>(diag.size());
  Eigen::VectorXd d(n), e(n), f(n);  // main, first and second upper bands of U
  d = diag.array() - shift;
  for (int i = 0; i + 1 < n; ++i) e(i) = off(i);
  e(n - 1) = 0.0;
  f.setZero();
  // Pivot floor: keeps the inverse-iteration blowup around 1e30 per tiny
  // pivot, far below the overflow threshold even when a few chain up.
  const auto floor_pivot = [](double v) {
    return std::abs(v) >= 1e-30 ? v : std::copysign(1e-30, v == 0.0 ? -1.0 : v);
  };
  for (int i = 0; i + 1 < n; ++i) {
    const double sub = off(i);
    if (std::abs(d(i)) >= std::abs(sub)) {
      d(i) = floor_pivot(d(i));
      const double m = sub / d(i);
      d(i + 1) -= m * e(i);
      b(i + 1) -= m * b(i);
    } else {
      // Swap rows i and i+1; the swap fills in the second upper band.
      const double m = d(i) / sub;
      const double di1 = d(i + 1), ei1 = e(i + 1);
      d(i) = sub;
      const double e_new = di1;
      const double f_new = ei1;
      d(i + 1) = e(i) - m * di1;
      e(i + 1) = -m * ei1;
      e(i) = e_new;
      f(i) = f_new;
      std::swap(b(i), b(i + 1));
      b(i + 1) -= m * b(i);
    }
  }
  d(n - 1) = floor_pivot(d(n - 1));
  Eigen::VectorXd x(n);
  x(n - 1) = b(n - 1) / d(n - 1);
  for (int i = n - 2; i >= 0; --i) {
    double s = b(i) - e(i) * x(i + 1);
    if (i + 2 < n) s -= f(i) * x(i + 2);
    x(i) = s / d(i);
  }
  return x;
}

}  // namespace

Eigen::VectorXd sample_block(const SourceParams& params, int n, RngStream& rng) {
  if (n < 1) throw std::domain_error("sample_block: blocklength must be >= 1");
  const double sd = std::sqrt(params.sigma2);
  Eigen::VectorXd u(n);
  double prev = 0.0;
  for (int i = 0; i < n; ++i) {
    prev = params.a * prev + rng.normal(sd);
    u(i) = prev;
  }
  return u;
}

Eigen::VectorXd apply_A(const SourceParams& params, const Eigen::VectorXd& u) {
  const int n = static_cast<int>(u.size());
  Eigen::VectorXd z(n);
  if (n == 0) return z;
  z(0) = u(0);
  for (int i = 1; i < n; ++i) z(i) = u(i) - params.a * u(i - 1);
  return z;
}

Decorrelator::Decorrelator(const SourceParams& params, int n, int max_n)
    : spectrum_(exact_eigenvalues(params, n)) {
  if (n > max_n)
    throw std::domain_error("Decorrelator: blocklength " + std::to_string(n) +
                            " exceeds the dense-basis cap " + std::to_string(max_n));
  basis_.resize(n, n);
  if (params.a == 0.0 || n == 1) {
    basis_.setIdentity();
    return;
  }
  Eigen::VectorXd diag = Eigen::VectorXd::Constant(n, 1.0 + params.a * params.a);
  diag(n - 1) = 1.0;
  const Eigen::VectorXd off = Eigen::VectorXd::Constant(n - 1, -params.a);
  RngStream rng(0x5eedu, static_cast<std::uint64_t>(n));
  const double cluster_tol = 1e-5 * (1.0 + params.a) * (1.0 + params.a);
  int cluster_start = 0;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v(n);
    for (int k = 0; k < n; ++k) v(k) = rng.normal();
    v.stableNormalize();
    for (int iter = 0; iter < 3; ++iter) {
      Eigen::VectorXd w = solve_shifted_tridiagonal(diag, off, spectrum_.mu(i), v);
      if (!w.allFinite() || w.isZero(0.0)) {
        for (int k = 0; k < n; ++k) w(k) = rng.normal();  // restart direction
      }
      w.stableNormalize();
      v = w;
    }
    if (i > 0 && spectrum_.mu(i) - spectrum_.mu(i - 1) >= cluster_tol) cluster_start = i;
    for (int j = cluster_start; j < i; ++j) v -= basis_.col(j).dot(v) * basis_.col(j);
    v.stableNormalize();
    basis_.col(i) = v;
  }
}

Eigen::VectorXd decorrelate(const Decorrelator& dec, const Eigen::VectorXd& u) {
  if (u.size() != dec.n())
    throw std::invalid_argument("decorrelate: vector length " + std::to_string(u.size()) +
                                " does not match blocklength " + std::to_string(dec.n()));
  return dec.basis().transpose() * u;
}

Eigen::VectorXd recorrelate(const Decorrelator& dec, const Eigen::VectorXd& x) {
  if (x.size() != dec.n())
    throw std::invalid_argument("recorrelate: vector length " + std::to_string(x.size()) +
                                " does not match blocklength " + std::to_string(dec.n()));
  return dec.basis() * x;
}

}  // namespace gmrd
