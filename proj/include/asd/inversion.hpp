#pragma once

#include "asd/eigensolver.hpp"
#include "asd/fem.hpp"
#include "asd/media.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace asd {

/// g(x) = exp(-|x|^2 / (2 gamma^2)) / (2 pi gamma^2)
double gaussian_kernel(const Eigen::Vector2d& x, double gamma);

/// Nodal collocation of the Gaussian convolution on a mesh, (F u)_i = sum_j g(x_i - x_j) w_j u_j
/// with lumped-mass weights w. The kernel matrix G_ij = g(x_i - x_j) is stored separately from
/// the weights, so F_h = G diag(w).
struct ConvolutionOperator {
  double gamma = 0.0;
  std::shared_ptr<const Mesh> mesh;
  Eigen::MatrixXd kernel;
  Eigen::VectorXd weights;

  FeFunction apply(const FeFunction& u) const;
  /// F applied to each nodal column.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& columns) const;
  /// The dense matrix F_h.
  Eigen::MatrixXd matrix() const;
};

inline constexpr int kMaxDenseVertices = 20000;

ConvolutionOperator build_convolution(std::shared_ptr<const Mesh> mesh, double gamma);

struct NoisyObservation {
  FeFunction data;
  double eta = 0.0;  ///< realized noise level ||y - y_noisy||_{L2}
};

/// Adds seeded Gaussian nodal noise scaled so that ||y - y_noisy||_{L2} = rho ||y||_{L2}.
NoisyObservation add_noise(const FeFunction& y, double rho, std::uint64_t seed);

struct InversionReport {
  std::string method;
  FeFunction reconstruction;
  double relative_error = 0.0;  ///< ||u - u_true|| / ||u_true||
  double tau = 0.0;             ///< ||F u - y|| / eta
  int iterations = 0;
  bool converged = true;
  std::vector<double> misfits;  ///< ||F u^(m) - y|| per iteration (ASI only)
};

struct AsiOptions {
  WeightSpec weight{WeightForm::q_power, 2.0, 1e-2};
  int k = 25;
  double tau_max = 1.1;
  int iter_max = 20;
  EigenOptions eigen;
};

/// Adaptive spectral inversion: u^(0) = y, then u^(m) minimizes ||F u - y|| over
/// phi0^(m) + span{phi_k^(m)} built from L_eps[u^(m-1)] with the boundary values of `truth`,
/// until ||F u - y|| <= tau_max * eta or iter_max is reached.
InversionReport asi_solve(const ConvolutionOperator& op, const FeFunction& y_noisy, double eta, const FeFunction& truth,
                          const AsiOptions& options = {});

/// Truncated SVD of F_h, discarding singular values below `threshold` (default sqrt(eta)).
InversionReport tsvd_solve(const ConvolutionOperator& op, const FeFunction& y_noisy, double eta, const FeFunction& truth,
                           double threshold = std::numeric_limits<double>::quiet_NaN());

/// Pseudo-inverse from explicit SVD factors F = U diag(s) V^T with s_i < threshold dropped.
Eigen::VectorXd tsvd_apply(const Eigen::MatrixXd& u, const Eigen::VectorXd& s, const Eigen::MatrixXd& v,
                           const Eigen::VectorXd& rhs, double threshold);

/// Dense LU solve of F_h u = y.
InversionReport direct_solve(const ConvolutionOperator& op, const FeFunction& y_noisy, double eta, const FeFunction& truth);

}  // namespace asd
