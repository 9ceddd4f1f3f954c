#pragma once

#include "asd/media.hpp"
#include "asd/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <memory>
#include <span>
#include <vector>

namespace asd {

enum class WeightForm {
  q_power,  ///< 1 / (t^q + eps^q)^(1/q)
  max       ///< 1 / max(t, eps)
};

struct WeightSpec {
  WeightForm form = WeightForm::q_power;
  double q = 2.0;
  double epsilon = 1e-8;

  void validate() const;
};

/// mu_hat_eps(t) for t = |grad v| >= 0.
double weight_on_element(double grad_norm, const WeightSpec& spec);

/// Per-element weights mu_eps[u_delta] (gradients of P1 functions are constant per element).
std::vector<double> element_weights(const FeFunction& u_delta, const WeightSpec& spec);

/// Compressed sparse row matrix.
class SparseMatrix {
 public:
  using Storage = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

  SparseMatrix() = default;
  SparseMatrix(Storage m, bool symmetric);

  int dimension() const { return static_cast<int>(m_.rows()); }
  bool symmetric() const { return symmetric_; }
  long nonzeros() const { return m_.nonZeros(); }

  std::span<const int> row_offsets() const { return {m_.outerIndexPtr(), static_cast<std::size_t>(m_.rows()) + 1}; }
  std::span<const int> column_indices() const { return {m_.innerIndexPtr(), static_cast<std::size_t>(m_.nonZeros())}; }
  std::span<const double> values() const { return {m_.valuePtr(), static_cast<std::size_t>(m_.nonZeros())}; }

  double coefficient(int i, int j) const { return m_.coeff(i, j); }
  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const { return m_ * x; }
  Eigen::MatrixXd to_dense() const { return Eigen::MatrixXd(m_); }
  /// Max absolute row sum.
  double norm_inf() const;

  const Storage& storage() const { return m_; }

 private:
  Storage m_;
  bool symmetric_ = false;
};

/// A_ij = sum_t w_t area_t grad(phi_i).grad(phi_j) for given per-element weights.
SparseMatrix assemble_weighted_stiffness(const Mesh& mesh, std::span<const double> weights);
/// Discrete bilinear form B[w, v] = <mu_eps[u_delta] grad w, grad v>.
SparseMatrix assemble_stiffness(const Mesh& mesh, const FeFunction& u_delta, const WeightSpec& spec);
/// Consistent P1 mass matrix.
SparseMatrix assemble_mass(const Mesh& mesh);
/// Row sums of the mass matrix.
Eigen::VectorXd lumped_mass(const Mesh& mesh);

/// Interior/boundary split of the vertex set.
struct DirichletReduction {
  std::vector<int> interior;
  std::vector<int> boundary;
  std::vector<int> full_to_reduced;  ///< -1 on boundary vertices

  int full_size() const { return static_cast<int>(full_to_reduced.size()); }
  int reduced_size() const { return static_cast<int>(interior.size()); }
  /// Reduced -> full, boundary entries set to zero.
  Eigen::VectorXd expand(const Eigen::VectorXd& reduced) const;
  Eigen::MatrixXd expand(const Eigen::MatrixXd& reduced_columns) const;
  Eigen::VectorXd restrict_to_interior(const Eigen::VectorXd& full) const;
};

DirichletReduction make_dirichlet_reduction(const Mesh& mesh);

struct ReducedSystem {
  SparseMatrix matrix;  ///< interior-interior block
  DirichletReduction reduction;
};

ReducedSystem reduce_dirichlet(const SparseMatrix& mat, const Mesh& mesh);
/// Interior-boundary coupling block (rows: interior, columns: boundary in reduction order).
SparseMatrix interior_boundary_block(const SparseMatrix& mat, const DirichletReduction& reduction);

/// Sparse LDL^T factorization with AMD fill-reducing ordering, for SPD matrices. Solves apply one
/// step of iterative refinement when the relative residual exceeds the refinement threshold.
class SpdSolver {
 public:
  explicit SpdSolver(const SparseMatrix& a);

  int dimension() const { return a_.dimension(); }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  /// ||A x - b|| / ||b|| (0 for b = 0).
  double relative_residual(const Eigen::VectorXd& x, const Eigen::VectorXd& b) const;
  const SparseMatrix& matrix() const { return a_; }

  static constexpr double kRefineThreshold = 1e-10;

 private:
  SparseMatrix a_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

/// phi0 with L phi0 = 0 inside and phi0 = g on the boundary. `boundary_values` are ordered like
/// make_dirichlet_reduction(mesh).boundary (ascending vertex index).
FeFunction solve_lifting(const SparseMatrix& a, std::shared_ptr<const Mesh> mesh, std::span<const double> boundary_values);
/// As above, reusing a factorization of the interior block.
FeFunction solve_lifting(const SparseMatrix& a, const SpdSolver& interior_solver, const DirichletReduction& reduction,
                         std::shared_ptr<const Mesh> mesh, std::span<const double> boundary_values);
/// Boundary values of g in reduction order.
std::vector<double> boundary_values_of(const FeFunction& g);

}  // namespace asd
