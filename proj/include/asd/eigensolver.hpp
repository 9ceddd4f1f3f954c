#pragma once

#include "asd/fem.hpp"

#include <Eigen/Core>

#include <cstdint>

namespace asd {

struct EigenOptions {
  /// Maximum number of thick restarts before giving up.
  int max_restarts = 50;
  /// Ritz estimate |beta * y_last| must fall below tolerance * theta_max for every wanted pair.
  double tolerance = 1e-12;
  /// Required explicit backward error of each returned pair (see eigen_backward_error).
  double residual_bound = 1e-8;
  /// Krylov subspace dimension; 0 selects max(2K + 20, 40) capped at n.
  int krylov_dim = 0;
  std::uint64_t seed = 0x5eedULL;
};

/// Smallest eigenpairs of A phi = lambda M phi.
struct EigenResult {
  Eigen::VectorXd eigenvalues;   ///< ascending
  Eigen::MatrixXd eigenvectors;  ///< one M-orthonormal column per eigenvalue
  Eigen::VectorXd residuals;     ///< explicit backward errors
  int restarts = 0;

  int count() const { return static_cast<int>(eigenvalues.size()); }
};

/// Normwise backward error ||A x - lambda M x|| / ((||A|| + |lambda| ||M||) ||x||), infinity norms
/// for the matrices. Computed from explicit sparse products.
double eigen_backward_error(const SparseMatrix& a, const SparseMatrix& m, double lambda, const Eigen::VectorXd& x);

/// K smallest eigenpairs by shift-invert Lanczos at shift 0 with full reorthogonalization in the
/// M inner product and thick restarts. Eigenvector signs are fixed so the largest-magnitude entry
/// is positive. Throws InputError for K > n and ConvergenceError after options.max_restarts.
EigenResult smallest_eigenpairs(const SparseMatrix& a, const SparseMatrix& m, int k, const EigenOptions& options = {});
/// Same, reusing an existing factorization of A.
EigenResult smallest_eigenpairs(const SpdSolver& a_solver, const SparseMatrix& m, int k, const EigenOptions& options = {});

struct DenseSpectrum {
  Eigen::VectorXd eigenvalues;   ///< ascending
  Eigen::MatrixXd eigenvectors;  ///< M-orthonormal columns
};

/// Full spectrum via Cholesky of M and a symmetric standard eigensolve. n <= 500.
DenseSpectrum dense_generalized_eig(const Eigen::MatrixXd& a, const Eigen::MatrixXd& m);

}  // namespace asd
