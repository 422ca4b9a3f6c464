#ifndef GMRD_SOURCE_HPP
#define GMRD_SOURCE_HPP

#include <Eigen/Dense>

#include "gmrd/params.hpp"
#include "gmrd/spectrum.hpp"
#include "gmrd/stats.hpp"

namespace gmrd {

/// One block U_1..U_n from the recursion with U_0 = 0.
Eigen::VectorXd sample_block(const SourceParams& params, int n, RngStream& rng);

/// z = A u, i.e. z_1 = u_1 and z_i = u_i - a u_{i-1}. Recovers innovations.
Eigen::VectorXd apply_A(const SourceParams& params, const Eigen::VectorXd& u);

// Orthonormal basis diagonalizing the source covariance. Column i of basis()
// is the eigenvector of A^T A for mu_i (ascending), so X = S^T U has
// independent coordinates with Var(X_i) = sigma_i^2 descending, matching the
// ordering in EigenSpectrum. Immutable after construction; safe to share.
class Decorrelator {
 public:
  // Eigenvectors come from inverse iteration seeded by the Sturm-bisection
  // eigenvalues, with re-orthogonalization inside close clusters. Dense n x n
  // storage; n above max_n is rejected.
  Decorrelator(const SourceParams& params, int n, int max_n = 4096);

  int n() const { return spectrum_.n; }
  const SourceParams& params() const { return spectrum_.params; }
  const EigenSpectrum& spectrum() const { return spectrum_; }
  const Eigen::MatrixXd& basis() const { return basis_; }

 private:
  EigenSpectrum spectrum_;
  Eigen::MatrixXd basis_;
};

/// x = S^T u. Throws std::invalid_argument on dimension mismatch.
Eigen::VectorXd decorrelate(const Decorrelator& dec, const Eigen::VectorXd& u);

/// u = S x, inverse of decorrelate.
Eigen::VectorXd recorrelate(const Decorrelator& dec, const Eigen::VectorXd& x);

}  // namespace gmrd

#endif  // GMRD_SOURCE_HPP
