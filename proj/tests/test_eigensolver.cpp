#include <doctest.h>

#include "asd/eigensolver.hpp"
#include "asd/errors.hpp"
#include "asd/fem.hpp"
#include "asd/media.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace asd;

namespace {

SparseMatrix to_sparse(const Eigen::MatrixXd& dense) {
  SparseMatrix::Storage s = dense.sparseView(1.0, 0.0);
  s.makeCompressed();
  return SparseMatrix(std::move(s), true);
}

// Random SPD matrix with a controllable sparsity pattern and spectrum spread.
Eigen::MatrixXd random_spd(int n, std::mt19937_64& rng, double fill, double spread) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), keep(0.0, 1.0);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || keep(rng) < fill) b(i, j) = u(rng);
    }
  }
  Eigen::MatrixXd a = b * b.transpose();
  for (int i = 0; i < n; ++i) a(i, i) += std::pow(spread, static_cast<double>(i) / n) * 0.1;
  return 0.5 * (a + a.transpose());
}

struct Laplacian {
  SparseMatrix a;
  SparseMatrix m;
};

Laplacian dirichlet_laplacian(int n) {
  const Mesh mesh = build_uniform_mesh(kUnitSquare, n, n);
  const std::vector<double> ones(static_cast<std::size_t>(mesh.triangle_count()), 1.0);
  return {reduce_dirichlet(assemble_weighted_stiffness(mesh, ones), mesh).matrix,
          reduce_dirichlet(assemble_mass(mesh), mesh).matrix};
}

double mass_inner(const SparseMatrix& m, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return x.dot(m.multiply(y));
}

}  // namespace

TEST_CASE("dense oracle examples") {
  const auto id = dense_generalized_eig(Eigen::MatrixXd::Identity(5, 5), Eigen::MatrixXd::Identity(5, 5));
  for (int i = 0; i < 5; ++i) CHECK(id.eigenvalues[i] == doctest::Approx(1.0));

  Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(6, 6);
  for (int i = 0; i < 6; ++i) diag(i, i) = 6 - i;
  const auto d = dense_generalized_eig(diag, Eigen::MatrixXd::Identity(6, 6));
  for (int i = 0; i < 6; ++i) CHECK(d.eigenvalues[i] == doctest::Approx(i + 1.0));

  Eigen::Matrix2d a, m;
  a << 2, 0, 0, 3;
  m << 1, 0, 0, 2;
  const auto two = dense_generalized_eig(a, m);
  CHECK(two.eigenvalues[0] == doctest::Approx(1.5));
  CHECK(two.eigenvalues[1] == doctest::Approx(2.0));
  CHECK((two.eigenvectors.transpose() * m * two.eigenvectors - Eigen::Matrix2d::Identity()).norm() < 1e-14);
}

TEST_CASE("dense oracle rejects an indefinite mass matrix and oversize input") {
  Eigen::Matrix2d m;
  m << 1, 0, 0, -1;
  CHECK_THROWS_AS(dense_generalized_eig(Eigen::Matrix2d::Identity(), m), InputError);
  CHECK_THROWS_AS(dense_generalized_eig(Eigen::MatrixXd::Identity(501, 501), Eigen::MatrixXd::Identity(501, 501)),
                  InputError);
}

TEST_CASE("smallest eigenpairs of random SPD pairs match the dense oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(5, 200);
  for (int trial = 0; trial < 24; ++trial) {
    const int n = trial == 0 ? 200 : size(rng);
    const Eigen::MatrixXd a = random_spd(n, rng, 0.05, 1e4);
    const Eigen::MatrixXd m = random_spd(n, rng, 0.02, 10.0) + Eigen::MatrixXd::Identity(n, n);
    const int k = std::min(n, 1 + trial % 8);
    CAPTURE(n);
    CAPTURE(k);

    const SparseMatrix sa = to_sparse(a), sm = to_sparse(m);
    const EigenResult r = smallest_eigenpairs(sa, sm, k);
    const auto oracle = dense_generalized_eig(a, m);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eigen_ref(a, m);
    REQUIRE(r.count() == k);
    for (int i = 0; i < k; ++i) {
      CHECK(std::abs(r.eigenvalues[i] - oracle.eigenvalues[i]) <= 1e-8 * oracle.eigenvalues[i]);
      CHECK(std::abs(r.eigenvalues[i] - eigen_ref.eigenvalues()[i]) <= 1e-8 * eigen_ref.eigenvalues()[i]);
      CHECK(r.eigenvalues[i] > 0.0);
      if (i > 0) CHECK(r.eigenvalues[i] >= r.eigenvalues[i - 1]);
      // independent residual check
      const Eigen::VectorXd x = r.eigenvectors.col(i);
      const Eigen::VectorXd res = a * x - r.eigenvalues[i] * (m * x);
      const double scale = (a.cwiseAbs().rowwise().sum().maxCoeff() +
                            r.eigenvalues[i] * m.cwiseAbs().rowwise().sum().maxCoeff()) *
                           x.norm();
      CHECK(res.norm() / scale <= 1e-8);
      CHECK(r.residuals[i] <= 1e-8);
    }
    const Eigen::MatrixXd gram = r.eigenvectors.transpose() * m * r.eigenvectors;
    CHECK((gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("Dirichlet Laplacian on the unit square at h = 1/32") {
  const Laplacian lap = dirichlet_laplacian(32);
  const EigenResult r = smallest_eigenpairs(lap.a, lap.m, 3);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK(std::abs(r.eigenvalues[0] - 2.0 * pi2) / (2.0 * pi2) < 1e-2);
  CHECK(r.eigenvalues[0] > 2.0 * pi2);
  CHECK(std::abs(r.eigenvalues[1] - 5.0 * pi2) / (5.0 * pi2) < 5e-2);
  CHECK(std::abs(r.eigenvalues[1] - r.eigenvalues[2]) / r.eigenvalues[1] < 2e-2);
  for (int i = 0; i < 3; ++i) {
    CHECK(eigen_backward_error(lap.a, lap.m, r.eigenvalues[i], r.eigenvectors.col(i)) <= 1e-8);
  }
}

TEST_CASE("eigenvector sign convention: largest-magnitude entry is positive") {
  const Laplacian lap = dirichlet_laplacian(12);
  const EigenResult r = smallest_eigenpairs(lap.a, lap.m, 4);
  for (int i = 0; i < r.count(); ++i) {
    Eigen::Index arg = 0;
    r.eigenvectors.col(i).cwiseAbs().maxCoeff(&arg);
    CHECK(r.eigenvectors(arg, i) > 0.0);
  }
}

TEST_CASE("requesting K then K+1 pairs reproduces the first K eigenvalues") {
  const auto mesh = std::make_shared<const Mesh>(build_uniform_mesh(kUnitSquare, 24, 24));
  const FeFunction u = interpolate_to_mesh(preset_medium("four_squares"), mesh);
  const WeightSpec spec{WeightForm::q_power, 2.0, 1e-4};
  const SparseMatrix a = reduce_dirichlet(assemble_stiffness(*mesh, u, spec), *mesh).matrix;
  const SparseMatrix m = reduce_dirichlet(assemble_mass(*mesh), *mesh).matrix;
  EigenResult prev = smallest_eigenpairs(a, m, 1);
  for (int k = 2; k <= 6; ++k) {
    const EigenResult next = smallest_eigenpairs(a, m, k);
    for (int i = 0; i < k - 1; ++i) {
      CAPTURE(k);
      CHECK(std::abs(next.eigenvalues[i] - prev.eigenvalues[i]) <= 1e-10 * prev.eigenvalues[i]);
    }
    prev = next;
  }
}

TEST_CASE("near-degenerate pair: the computed subspace matches the oracle subspace") {
  const Laplacian lap = dirichlet_laplacian(10);
  const EigenResult r = smallest_eigenpairs(lap.a, lap.m, 3);
  const auto oracle = dense_generalized_eig(lap.a.to_dense(), lap.m.to_dense());
  // principal angles between span{x2, x3} and the oracle's, both M-orthonormal
  const Eigen::MatrixXd mm = lap.m.to_dense();
  const Eigen::MatrixXd cross = r.eigenvectors.middleCols(1, 2).transpose() * mm * oracle.eigenvectors.middleCols(1, 2);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross);
  for (int i = 0; i < 2; ++i) {
    const double c = std::min(1.0, svd.singularValues()[i]);
    CHECK(std::acos(c) < 1e-6);
  }
}

TEST_CASE("M-orthonormality on a high-contrast weighted operator") {
  const auto mesh = std::make_shared<const Mesh>(build_uniform_mesh(kUnitSquare, 40, 40));
  const FeFunction u = interpolate_to_mesh(preset_medium("nonuniform_background"), mesh);
  const WeightSpec spec{WeightForm::q_power, 2.0, 1e-8};
  const SparseMatrix a = reduce_dirichlet(assemble_stiffness(*mesh, u, spec), *mesh).matrix;
  const SparseMatrix m = reduce_dirichlet(assemble_mass(*mesh), *mesh).matrix;
  const EigenResult r = smallest_eigenpairs(a, m, 5);
  for (int i = 0; i < r.count(); ++i) {
    for (int j = 0; j < r.count(); ++j) {
      CHECK(std::abs(mass_inner(m, r.eigenvectors.col(i), r.eigenvectors.col(j)) - (i == j ? 1.0 : 0.0)) <= 1e-10);
    }
    CHECK(eigen_backward_error(a, m, r.eigenvalues[i], r.eigenvectors.col(i)) <= 1e-8);
  }
}

TEST_CASE("lambda_1 of the disc stays bounded below as eps shrinks") {
  const auto mesh = std::make_shared<const Mesh>(build_uniform_mesh(kUnitSquare, 40, 40));
  const FeFunction u = interpolate_to_mesh(preset_medium("disc"), mesh);
  const SparseMatrix m = reduce_dirichlet(assemble_mass(*mesh), *mesh).matrix;
  double reference = 0.0;
  for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const SparseMatrix a =
        reduce_dirichlet(assemble_stiffness(*mesh, u, {WeightForm::q_power, 2.0, eps}), *mesh).matrix;
    const double lambda1 = smallest_eigenpairs(a, m, 1).eigenvalues[0];
    if (reference == 0.0) reference = lambda1;
    CAPTURE(eps);
    CHECK(lambda1 > 0.1 * reference);
  }
}

TEST_CASE("input validation and convergence failure") {
  const Laplacian lap = dirichlet_laplacian(4);
  CHECK_THROWS_AS(smallest_eigenpairs(lap.a, lap.m, lap.a.dimension() + 1), InputError);
  CHECK(smallest_eigenpairs(lap.a, lap.m, 0).count() == 0);
  CHECK(smallest_eigenpairs(lap.a, lap.m, lap.a.dimension()).count() == lap.a.dimension());

  const Laplacian big = dirichlet_laplacian(30);
  EigenOptions options;
  options.max_restarts = 0;
  options.krylov_dim = 12;
  try {
    smallest_eigenpairs(big.a, big.m, 10, options);
    FAIL("expected a convergence error");
  } catch (const ConvergenceError& e) {
    CHECK(e.best_residuals().size() == 10u);
  }
}

TEST_CASE("factorization reuse gives the same spectrum") {
  const Laplacian lap = dirichlet_laplacian(16);
  const SpdSolver solver(lap.a);
  const EigenResult direct = smallest_eigenpairs(lap.a, lap.m, 4);
  const EigenResult reused = smallest_eigenpairs(solver, lap.m, 4);
  for (int i = 0; i < 4; ++i) CHECK(reused.eigenvalues[i] == doctest::Approx(direct.eigenvalues[i]).epsilon(1e-12));
}
