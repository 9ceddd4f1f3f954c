#pragma once

#include "asd/eigensolver.hpp"
#include "asd/fem.hpp"
#include "asd/media.hpp"
#include "asd/quadrature.hpp"

#include <Eigen/Core>

#include <memory>

namespace asd {

/// Lifting phi0 plus the K smallest eigenpairs of L_eps[v] on the Dirichlet-reduced space.
struct SpectralBasis {
  FeFunction phi0;
  Eigen::VectorXd eigenvalues;          ///< lambda_1 <= ... <= lambda_K
  Eigen::MatrixXd modes;                ///< phi_k as full-mesh nodal columns, zero on the boundary
  Eigen::VectorXd residuals;            ///< eigen backward errors
  double epsilon = 0.0;
  double delta = 0.0;
  WeightSpec weight;
  std::shared_ptr<const SparseMatrix> mass;
  Eigen::MatrixXd mass_modes;           ///< M * modes

  int size() const { return static_cast<int>(modes.cols()); }
  const std::shared_ptr<const Mesh>& mesh() const { return phi0.mesh; }
  /// phi_k, k = 1..K.
  FeFunction mode(int k) const;
};

/// AS basis of u_delta: lifting of u_delta's boundary values and K eigenpairs of L_eps[u_delta].
SpectralBasis build_as_basis(const FeFunction& u_delta, const WeightSpec& spec, int k, const EigenOptions& options = {});

/// AS basis of the operator L_eps[weight_source], lifting the boundary values of `boundary_data`.
SpectralBasis build_as_basis(const FeFunction& weight_source, const FeFunction& boundary_data, const WeightSpec& spec,
                             int k, const EigenOptions& options = {});

struct Projection {
  FeFunction function;
  Eigen::VectorXd coefficients;  ///< beta_k with projection = sum_k beta_k phi_k
};

/// Pi_K v: L2-orthogonal projection onto span{phi_1..phi_K}, via the K x K normal equations.
/// Throws DegenerateBasisError if the Gram matrix has condition number > 1e12.
Projection orthogonal_projection(const SpectralBasis& basis, const FeFunction& v);
/// Pi_K of an exact field; load vector by 19-point quadrature.
Projection orthogonal_projection(const SpectralBasis& basis, const SampledField& exact);

/// Q_K v = phi0 + Pi_K (v - phi0).
FeFunction affine_projection(const SpectralBasis& basis, const FeFunction& v);
FeFunction affine_projection(const SpectralBasis& basis, const SampledField& exact);

/// Gram matrix solve: coefficients beta with (Phi^T M Phi) beta = rhs.
Eigen::VectorXd solve_normal_equations(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs);

/// ||v||_{L2}, exact for P1 functions.
double l2_norm_fe(const FeFunction& v);
/// ||v - w||_{L2}, exact for P1 functions on the same mesh.
double l2_error_fe(const FeFunction& v, const FeFunction& w);

}  // namespace asd
