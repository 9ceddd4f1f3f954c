#include "asd/inversion.hpp"

#include "asd/errors.hpp"
#include "asd/spectral.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <random>

namespace asd {

double gaussian_kernel(const Eigen::Vector2d& x, double gamma) {
  const double g2 = gamma * gamma;
  return std::exp(-x.squaredNorm() / (2.0 * g2)) / (2.0 * std::numbers::pi * g2);
}

FeFunction ConvolutionOperator::apply(const FeFunction& u) const {
  if (u.size() != kernel.rows()) throw InputError("ConvolutionOperator::apply: size mismatch");
  return FeFunction(mesh, kernel * weights.cwiseProduct(u.coefficients));
}

Eigen::MatrixXd ConvolutionOperator::apply(const Eigen::MatrixXd& columns) const {
  if (columns.rows() != kernel.rows()) throw InputError("ConvolutionOperator::apply: size mismatch");
  return kernel * (weights.asDiagonal() * columns);
}

Eigen::MatrixXd ConvolutionOperator::matrix() const { return kernel * weights.asDiagonal(); }

ConvolutionOperator build_convolution(std::shared_ptr<const Mesh> mesh, double gamma) {
  if (!(gamma > 0.0)) throw InputError("build_convolution: gamma must be positive");
  const int n = mesh->vertex_count();
  if (n > kMaxDenseVertices)
    throw CapacityError("build_convolution: " + std::to_string(n) + " vertices exceed the dense limit of " +
                        std::to_string(kMaxDenseVertices));
  ConvolutionOperator op;
  op.gamma = gamma;
  op.kernel.resize(n, n);
  const auto verts = mesh->vertices();
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) {
      const double g = gaussian_kernel(verts[static_cast<std::size_t>(i)] - verts[static_cast<std::size_t>(j)], gamma);
      op.kernel(i, j) = g;
      op.kernel(j, i) = g;
    }
  }
  op.weights = lumped_mass(*mesh);
  op.mesh = std::move(mesh);
  return op;
}

NoisyObservation add_noise(const FeFunction& y, double rho, std::uint64_t seed) {
  if (!(rho >= 0.0)) throw InputError("add_noise: noise level must be non-negative");
  NoisyObservation out{y, 0.0};
  if (rho == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd noise(y.size());
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise[i] = normal(rng);
  const FeFunction noise_fn(y.mesh, noise);
  const double target = rho * l2_norm_fe(y);
  const double scale = target / l2_norm_fe(noise_fn);
  out.data = FeFunction(y.mesh, y.coefficients + scale * noise);
  out.eta = l2_error_fe(out.data, y);
  return out;
}

namespace {

void fill_metrics(InversionReport& report, const ConvolutionOperator& op, const FeFunction& y_noisy, double eta,
                  const FeFunction& truth) {
  report.relative_error = l2_error_fe(report.reconstruction, truth) / l2_norm_fe(truth);
  const double misfit = l2_error_fe(op.apply(report.reconstruction), y_noisy);
  report.tau = eta > 0.0 ? misfit / eta : std::numeric_limits<double>::infinity();
}

}  // namespace

InversionReport asi_solve(const ConvolutionOperator& op, const FeFunction& y_noisy, double eta, const FeFunction& truth,
                          const AsiOptions& options) {
  if (options.k < 1) throw InputError("asi_solve: K must be at least 1");
  if (!(eta > 0.0)) throw InputError("asi_solve: eta must be positive");
  if (!(options.tau_max >= 1.0)) throw InputError("asi_solve: tau_max must be >= 1");
  require_same_mesh(y_noisy, truth, "asi_solve");

  const SparseMatrix mass = assemble_mass(*y_noisy.mesh);
  InversionReport report;
  report.method = "ASI";
  report.converged = false;
  FeFunction current = y_noisy;
  for (int it = 1; it <= options.iter_max; ++it) {
    const SpectralBasis basis = build_as_basis(current, truth, options.weight, options.k, options.eigen);
    const Eigen::MatrixXd columns = op.apply(basis.modes);
    const Eigen::VectorXd offset = op.apply(basis.phi0).coefficients - y_noisy.coefficients;
    const Eigen::MatrixXd m_columns = mass.storage() * columns;
    Eigen::MatrixXd gram = columns.transpose() * m_columns;
    gram = 0.5 * (gram + gram.transpose()).eval();
    const Eigen::VectorXd beta = gram.ldlt().solve(-(m_columns.transpose() * offset));

    current = FeFunction(y_noisy.mesh, basis.phi0.coefficients + basis.modes * beta);
    const double misfit = l2_error_fe(op.apply(current), y_noisy);
    report.misfits.push_back(misfit);
    report.iterations = it;
    if (misfit <= options.tau_max * eta) {
      report.converged = true;
      break;
    }
  }
  report.reconstruction = current;
  fill_metrics(report, op, y_noisy, eta, truth);
  return report;
}

Eigen::VectorXd tsvd_apply(const Eigen::MatrixXd& u, const Eigen::VectorXd& s, const Eigen::MatrixXd& v,
                           const Eigen::VectorXd& rhs, double threshold) {
  Eigen::VectorXd coeffs = u.transpose() * rhs;
  for (Eigen::Index i = 0; i < s.size(); ++i) coeffs[i] = s[i] >= threshold && s[i] > 0.0 ? coeffs[i] / s[i] : 0.0;
  return v * coeffs;
}

InversionReport tsvd_solve(const ConvolutionOperator& op, const FeFunction& y_noisy, double eta, const FeFunction& truth,
                           double threshold) {
  if (!(eta > 0.0)) throw InputError("tsvd_solve: eta must be positive");
  if (std::isnan(threshold)) threshold = std::sqrt(eta);
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(op.matrix(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  InversionReport report;
  report.method = "TSVD";
  report.reconstruction =
      FeFunction(y_noisy.mesh, tsvd_apply(svd.matrixU(), svd.singularValues(), svd.matrixV(), y_noisy.coefficients, threshold));
  report.iterations = 1;
  fill_metrics(report, op, y_noisy, eta, truth);
  return report;
}

InversionReport direct_solve(const ConvolutionOperator& op, const FeFunction& y_noisy, double eta, const FeFunction& truth) {
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(op.matrix());
  const auto diag = lu.matrixLU().diagonal();
  if ((diag.array() == 0.0).any()) throw SolveError("direct_solve: matrix is exactly singular");
  Eigen::VectorXd x = lu.solve(y_noisy.coefficients);
  if (!x.allFinite()) throw SolveError("direct_solve: solution is not finite");
  InversionReport report;
  report.method = "LU";
  report.reconstruction = FeFunction(y_noisy.mesh, std::move(x));
  report.iterations = 1;
  fill_metrics(report, op, y_noisy, eta, truth);
  return report;
}

}  // namespace asd
