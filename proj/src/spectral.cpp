#include "asd/spectral.hpp"

#include "asd/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace asd {

FeFunction SpectralBasis::mode(int k) const {
  if (k < 1 || k > size()) throw InputError("SpectralBasis::mode: index out of range");
  return FeFunction(mesh(), modes.col(k - 1));
}

SpectralBasis build_as_basis(const FeFunction& u_delta, const WeightSpec& spec, int k, const EigenOptions& options) {
  return build_as_basis(u_delta, u_delta, spec, k, options);
}

SpectralBasis build_as_basis(const FeFunction& weight_source, const FeFunction& boundary_data, const WeightSpec& spec,
                             int k, const EigenOptions& options) {
  if (k < 0) throw InputError("build_as_basis: K must be non-negative");
  require_same_mesh(weight_source, boundary_data, "build_as_basis");
  spec.validate();
  const auto& mesh = weight_source.mesh;

  const SparseMatrix a = assemble_stiffness(*mesh, weight_source, spec);
  auto mass = std::make_shared<const SparseMatrix>(assemble_mass(*mesh));
  const ReducedSystem a_red = reduce_dirichlet(a, *mesh);
  const ReducedSystem m_red = reduce_dirichlet(*mass, *mesh);
  const SpdSolver solver(a_red.matrix);

  SpectralBasis basis;
  const auto g = boundary_values_of(boundary_data);
  basis.phi0 = solve_lifting(a, solver, a_red.reduction, mesh, g);

  const EigenResult eig = smallest_eigenpairs(solver, m_red.matrix, k, options);
  basis.eigenvalues = eig.eigenvalues;
  basis.residuals = eig.residuals;
  basis.modes = a_red.reduction.expand(eig.eigenvectors);
  basis.epsilon = spec.epsilon;
  basis.delta = mesh->h();
  basis.weight = spec;
  basis.mass_modes = mass->storage() * basis.modes;
  basis.mass = std::move(mass);
  return basis;
}

Eigen::VectorXd solve_normal_equations(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs) {
  if (gram.rows() == 0) return Eigen::VectorXd(0);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) throw DegenerateBasisError("projection: Gram matrix is numerically singular");
  return gram.llt().solve(rhs);
}

namespace {

Projection project_with_load(const SpectralBasis& basis, const Eigen::VectorXd& load) {
  const Eigen::MatrixXd gram = basis.modes.transpose() * basis.mass_modes;
  Projection p;
  p.coefficients = solve_normal_equations(0.5 * (gram + gram.transpose()), load);
  Eigen::VectorXd values = Eigen::VectorXd::Zero(basis.modes.rows());
  if (basis.size() > 0) values = basis.modes * p.coefficients;
  p.function = FeFunction(basis.mesh(), std::move(values));
  return p;
}

}  // namespace

Projection orthogonal_projection(const SpectralBasis& basis, const FeFunction& v) {
  require_same_mesh(basis.phi0, v, "orthogonal_projection");
  return project_with_load(basis, basis.mass_modes.transpose() * v.coefficients);
}

Projection orthogonal_projection(const SpectralBasis& basis, const SampledField& exact) {
  if (exact.mesh().vertex_count() != basis.mesh()->vertex_count())
    throw InputError("orthogonal_projection: sampled field lives on a different mesh");
  return project_with_load(basis, exact.inner_products(basis.modes));
}

FeFunction affine_projection(const SpectralBasis& basis, const FeFunction& v) {
  require_same_mesh(basis.phi0, v, "affine_projection");
  const FeFunction shifted(basis.mesh(), v.coefficients - basis.phi0.coefficients);
  const Projection p = orthogonal_projection(basis, shifted);
  return FeFunction(basis.mesh(), basis.phi0.coefficients + p.function.coefficients);
}

FeFunction affine_projection(const SpectralBasis& basis, const SampledField& exact) {
  if (exact.mesh().vertex_count() != basis.mesh()->vertex_count())
    throw InputError("affine_projection: sampled field lives on a different mesh");
  // <u - phi0, phi_k> = <u, phi_k> - phi0^T M phi_k
  const Eigen::VectorXd load =
      exact.inner_products(basis.modes) - basis.mass_modes.transpose() * basis.phi0.coefficients;
  const Projection p = project_with_load(basis, load);
  return FeFunction(basis.mesh(), basis.phi0.coefficients + p.function.coefficients);
}

double l2_norm_fe(const FeFunction& v) { return l2_error_fe(v, FeFunction::zeros(v.mesh)); }

double l2_error_fe(const FeFunction& v, const FeFunction& w) {
  require_same_mesh(v, w, "l2_error_fe");
  const Mesh& mesh = *v.mesh;
  double total = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Triangle& tri = mesh.triangle(t);
    double sum = 0.0, sum_sq = 0.0;
    for (int vtx : tri) {
      const double e = v.coefficients[vtx] - w.coefficients[vtx];
      sum += e;
      sum_sq += e * e;
    }
    total += element_geometry(mesh, t).area / 12.0 * (sum_sq + sum * sum);
  }
  return std::sqrt(std::max(total, 0.0));
}

}  // namespace asd
