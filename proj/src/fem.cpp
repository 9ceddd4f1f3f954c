#include "asd/fem.hpp"

#include "asd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace asd {

void WeightSpec::validate() const {
  if (!(epsilon > 0.0)) throw InputError("weight: epsilon must be positive");
  if (form == WeightForm::q_power && !(q >= 1.0)) throw InputError("weight: q must be >= 1");
}

double weight_on_element(double grad_norm, const WeightSpec& spec) {
  if (!(grad_norm >= 0.0)) throw InputError("weight_on_element: gradient norm must be non-negative");
  const double t = grad_norm;
  if (spec.form == WeightForm::max) return 1.0 / std::max(t, spec.epsilon);
  if (spec.q == 2.0) return 1.0 / std::hypot(t, spec.epsilon);
  // (t^q + e^q)^(1/q) = m (1 + (s/m)^q)^(1/q) with m = max, s = min; avoids under/overflow.
  const double m = std::max(t, spec.epsilon);
  const double s = std::min(t, spec.epsilon);
  return 1.0 / (m * std::pow(1.0 + std::pow(s / m, spec.q), 1.0 / spec.q));
}

std::vector<double> element_weights(const FeFunction& u_delta, const WeightSpec& spec) {
  spec.validate();
  const Mesh& mesh = *u_delta.mesh;
  std::vector<double> w(static_cast<std::size_t>(mesh.triangle_count()));
  for (int t = 0; t < mesh.triangle_count(); ++t)
    w[static_cast<std::size_t>(t)] = weight_on_element(u_delta.gradient(t).norm(), spec);
  return w;
}

SparseMatrix::SparseMatrix(Storage m, bool symmetric) : m_(std::move(m)), symmetric_(symmetric) {
  m_.makeCompressed();
}

double SparseMatrix::norm_inf() const {
  double best = 0.0;
  for (int i = 0; i < m_.outerSize(); ++i) {
    double row = 0.0;
    for (Storage::InnerIterator it(m_, i); it; ++it) row += std::abs(it.value());
    best = std::max(best, row);
  }
  return best;
}

SparseMatrix assemble_weighted_stiffness(const Mesh& mesh, std::span<const double> weights) {
  if (static_cast<int>(weights.size()) != mesh.triangle_count())
    throw InputError("assemble_weighted_stiffness: one weight per element required");
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(9 * static_cast<std::size_t>(mesh.triangle_count()));
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    const Triangle& tri = mesh.triangle(t);
    const double scale = weights[static_cast<std::size_t>(t)] * g.area;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) entries.emplace_back(tri[a], tri[b], scale * g.gradients[a].dot(g.gradients[b]));
  }
  SparseMatrix::Storage m(mesh.vertex_count(), mesh.vertex_count());
  m.setFromTriplets(entries.begin(), entries.end());
  return SparseMatrix(std::move(m), true);
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const FeFunction& u_delta, const WeightSpec& spec) {
  if (u_delta.size() != mesh.vertex_count()) throw InputError("assemble_stiffness: u_delta lives on a different mesh");
  const auto w = element_weights(u_delta, spec);
  return assemble_weighted_stiffness(mesh, w);
}

SparseMatrix assemble_mass(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(9 * static_cast<std::size_t>(mesh.triangle_count()));
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const double area = element_geometry(mesh, t).area;
    const Triangle& tri = mesh.triangle(t);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) entries.emplace_back(tri[a], tri[b], a == b ? area / 6.0 : area / 12.0);
  }
  SparseMatrix::Storage m(mesh.vertex_count(), mesh.vertex_count());
  m.setFromTriplets(entries.begin(), entries.end());
  return SparseMatrix(std::move(m), true);
}

Eigen::VectorXd lumped_mass(const Mesh& mesh) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(mesh.vertex_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const double third = element_geometry(mesh, t).area / 3.0;
    for (int v : mesh.triangle(t)) w[v] += third;
  }
  return w;
}

Eigen::VectorXd DirichletReduction::expand(const Eigen::VectorXd& reduced) const {
  if (reduced.size() != reduced_size()) throw InputError("DirichletReduction::expand: size mismatch");
  Eigen::VectorXd full = Eigen::VectorXd::Zero(full_size());
  for (int r = 0; r < reduced_size(); ++r) full[interior[static_cast<std::size_t>(r)]] = reduced[r];
  return full;
}

Eigen::MatrixXd DirichletReduction::expand(const Eigen::MatrixXd& reduced_columns) const {
  if (reduced_columns.rows() != reduced_size()) throw InputError("DirichletReduction::expand: size mismatch");
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(full_size(), reduced_columns.cols());
  for (int r = 0; r < reduced_size(); ++r) full.row(interior[static_cast<std::size_t>(r)]) = reduced_columns.row(r);
  return full;
}

Eigen::VectorXd DirichletReduction::restrict_to_interior(const Eigen::VectorXd& full) const {
  if (full.size() != full_size()) throw InputError("DirichletReduction::restrict_to_interior: size mismatch");
  Eigen::VectorXd r(reduced_size());
  for (int i = 0; i < reduced_size(); ++i) r[i] = full[interior[static_cast<std::size_t>(i)]];
  return r;
}

DirichletReduction make_dirichlet_reduction(const Mesh& mesh) {
  DirichletReduction red;
  red.full_to_reduced.assign(static_cast<std::size_t>(mesh.vertex_count()), -1);
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    if (mesh.on_boundary(i)) {
      red.boundary.push_back(i);
    } else {
      red.full_to_reduced[static_cast<std::size_t>(i)] = static_cast<int>(red.interior.size());
      red.interior.push_back(i);
    }
  }
  return red;
}

namespace {

SparseMatrix extract_block(const SparseMatrix& mat, const std::vector<int>& rows, const std::vector<int>& col_map,
                           int ncols, bool symmetric) {
  std::vector<Eigen::Triplet<double>> entries;
  const auto& s = mat.storage();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (SparseMatrix::Storage::InnerIterator it(s, rows[r]); it; ++it) {
      const int c = col_map[static_cast<std::size_t>(it.col())];
      if (c >= 0) entries.emplace_back(static_cast<int>(r), c, it.value());
    }
  }
  SparseMatrix::Storage block(static_cast<int>(rows.size()), ncols);
  block.setFromTriplets(entries.begin(), entries.end());
  return SparseMatrix(std::move(block), symmetric);
}

}  // namespace

ReducedSystem reduce_dirichlet(const SparseMatrix& mat, const Mesh& mesh) {
  if (mat.dimension() != mesh.vertex_count()) throw InputError("reduce_dirichlet: matrix dimension != vertex count");
  ReducedSystem out;
  out.reduction = make_dirichlet_reduction(mesh);
  if (out.reduction.interior.empty()) throw InputError("reduce_dirichlet: mesh has no interior vertices");
  out.matrix = extract_block(mat, out.reduction.interior, out.reduction.full_to_reduced, out.reduction.reduced_size(),
                             mat.symmetric());
  return out;
}

SparseMatrix interior_boundary_block(const SparseMatrix& mat, const DirichletReduction& reduction) {
  std::vector<int> boundary_map(static_cast<std::size_t>(reduction.full_size()), -1);
  for (std::size_t b = 0; b < reduction.boundary.size(); ++b)
    boundary_map[static_cast<std::size_t>(reduction.boundary[b])] = static_cast<int>(b);
  return extract_block(mat, reduction.interior, boundary_map, static_cast<int>(reduction.boundary.size()), false);
}

SpdSolver::SpdSolver(const SparseMatrix& a) : a_(a) {
  const Eigen::SparseMatrix<double> col_major = a.storage();
  ldlt_.compute(col_major);
  if (ldlt_.info() != Eigen::Success) throw SolveError("SpdSolver: factorization failed (matrix not SPD?)");
  const auto d = ldlt_.vectorD();
  if (d.size() > 0 && !(d.minCoeff() > 0.0)) throw SolveError("SpdSolver: matrix is not positive definite");
}

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd x = ldlt_.solve(b);
  const double bn = b.norm();
  if (bn == 0.0) return x;
  Eigen::VectorXd r = b - a_.storage() * x;
  if (r.norm() > kRefineThreshold * bn) x += ldlt_.solve(r);
  return x;
}

double SpdSolver::relative_residual(const Eigen::VectorXd& x, const Eigen::VectorXd& b) const {
  const double bn = b.norm();
  const double rn = (b - a_.storage() * x).norm();
  return bn == 0.0 ? rn : rn / bn;
}

std::vector<double> boundary_values_of(const FeFunction& g) {
  std::vector<double> out;
  for (int i = 0; i < g.mesh->vertex_count(); ++i)
    if (g.mesh->on_boundary(i)) out.push_back(g.coefficients[i]);
  return out;
}

FeFunction solve_lifting(const SparseMatrix& a, std::shared_ptr<const Mesh> mesh, std::span<const double> boundary_values) {
  const ReducedSystem reduced = reduce_dirichlet(a, *mesh);
  const SpdSolver solver(reduced.matrix);
  return solve_lifting(a, solver, reduced.reduction, std::move(mesh), boundary_values);
}

FeFunction solve_lifting(const SparseMatrix& a, const SpdSolver& interior_solver, const DirichletReduction& reduction,
                         std::shared_ptr<const Mesh> mesh, std::span<const double> boundary_values) {
  if (a.dimension() != mesh->vertex_count()) throw InputError("solve_lifting: matrix dimension != vertex count");
  if (boundary_values.size() != reduction.boundary.size())
    throw InputError("solve_lifting: expected " + std::to_string(reduction.boundary.size()) + " boundary values");
  const Eigen::Map<const Eigen::VectorXd> g(boundary_values.data(), static_cast<Eigen::Index>(boundary_values.size()));
  // Rows of A sum to zero, so shifting g by a constant shifts the solution by the same constant.
  // Solving for the deviation from the midrange keeps constant data exact.
  const double shift = g.size() > 0 ? 0.5 * (g.minCoeff() + g.maxCoeff()) : 0.0;
  const SparseMatrix aib = interior_boundary_block(a, reduction);
  const Eigen::VectorXd rhs = -(aib.storage() * (g.array() - shift).matrix());
  Eigen::VectorXd x = interior_solver.solve(rhs);
  if (!x.allFinite()) throw SolveError("solve_lifting: reduced system is singular");
  x.array() += shift;

  Eigen::VectorXd full = reduction.expand(x);
  for (std::size_t b = 0; b < reduction.boundary.size(); ++b) full[reduction.boundary[b]] = boundary_values[b];
  return FeFunction(std::move(mesh), std::move(full));
}

}  // namespace asd
