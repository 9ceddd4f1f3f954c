#include "asd/eigensolver.hpp"

#include "asd/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace asd {
namespace {

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v[imax] < 0.0) v = -v;
}

// Lanczos basis in the M inner product with full (two-pass) reorthogonalization.
class KrylovSchur {
 public:
  KrylovSchur(const SpdSolver& solver, const SparseMatrix& m, int dim, std::uint64_t seed)
      : solver_(solver), m_(m.storage()), n_(m.dimension()), dim_(dim), rng_(seed) {
    basis_ = Eigen::MatrixXd::Zero(n_, dim_ + 1);
    h_ = Eigen::MatrixXd::Zero(dim_ + 1, dim_);
  }

  void start() {
    basis_.col(0) = random_orthogonal(0);
    kept_ = 0;
  }

  // Extends the factorization from kept_ columns to dim_ columns.
  void expand() {
    for (int j = kept_; j < dim_; ++j) {
      Eigen::VectorXd w = solver_.solve(m_ * basis_.col(j));
      const Eigen::VectorXd coeffs = orthogonalize(w, j + 1);
      h_.block(0, j, j + 1, 1) = coeffs;
      double beta = m_norm(w);
      const double scale = std::max(coeffs.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
      if (beta <= 1e-13 * scale) {
        // Invariant subspace found; continue with a fresh direction (the coupling is zero).
        beta = 0.0;
        basis_.col(j + 1) = j + 1 < dim_ ? random_orthogonal(j + 1) : Eigen::VectorXd::Zero(n_);
        if (j + 1 < dim_ && basis_.col(j + 1).squaredNorm() == 0.0) {
          dim_ = j + 1;  // the whole space is spanned
          h_(j + 1, j) = 0.0;
          return;
        }
      } else {
        basis_.col(j + 1) = w / beta;
      }
      h_(j + 1, j) = beta;
    }
  }

  struct Ritz {
    Eigen::VectorXd theta;  // descending
    Eigen::MatrixXd y;      // matching columns
    double beta;
  };

  Ritz ritz() const {
    Eigen::MatrixXd s = h_.topLeftCorner(dim_, dim_);
    s = 0.5 * (s + s.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    Ritz r;
    r.theta = es.eigenvalues().reverse();
    r.y = es.eigenvectors().rowwise().reverse();
    r.beta = h_(dim_, dim_ - 1);
    return r;
  }

  Eigen::VectorXd ritz_vector(const Ritz& r, int i) const { return basis_.leftCols(dim_) * r.y.col(i); }

  // Keeps the `keep` leading Ritz vectors and the residual direction.
  void restart(const Ritz& r, int keep) {
    Eigen::MatrixXd kept = basis_.leftCols(dim_) * r.y.leftCols(keep);
    const Eigen::VectorXd next = basis_.col(dim_);
    basis_.leftCols(keep) = kept;
    basis_.col(keep) = next;
    h_.setZero();
    for (int i = 0; i < keep; ++i) {
      h_(i, i) = r.theta[i];
      h_(keep, i) = r.beta * r.y(dim_ - 1, i);
    }
    kept_ = keep;
    if (r.beta == 0.0) {
      // Residual direction is empty: restart the extension from a fresh vector.
      basis_.col(keep) = random_orthogonal(keep);
    }
  }

  int dim() const { return dim_; }

 private:
  double m_norm(const Eigen::VectorXd& v) const { return std::sqrt(std::max(v.dot(m_ * v), 0.0)); }

  // M-orthogonalizes w against the first `cols` basis vectors (twice); returns the coefficients.
  Eigen::VectorXd orthogonalize(Eigen::VectorXd& w, int cols) const {
    Eigen::VectorXd total = Eigen::VectorXd::Zero(cols);
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd mw = m_ * w;
      const Eigen::VectorXd c = basis_.leftCols(cols).transpose() * mw;
      w -= basis_.leftCols(cols) * c;
      total += c;
    }
    return total;
  }

  Eigen::VectorXd random_orthogonal(int cols) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int attempt = 0; attempt < 3; ++attempt) {
      Eigen::VectorXd v(n_);
      for (Eigen::Index i = 0; i < n_; ++i) v[i] = dist(rng_);
      const double before = m_norm(v);
      if (cols > 0) orthogonalize(v, cols);
      const double after = m_norm(v);
      if (after > 1e-8 * before) return v / after;
    }
    return Eigen::VectorXd::Zero(n_);
  }

  const SpdSolver& solver_;
  const SparseMatrix::Storage& m_;
  Eigen::Index n_;
  int dim_;
  int kept_ = 0;
  std::mt19937_64 rng_;
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd h_;
};

// One block inverse-iteration step followed by Rayleigh-Ritz. Lanczos Ritz vectors carry
// rounding-level components along the stiff end of the spectrum, which A amplifies in the residual.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> polish(const SpdSolver& solver, const SparseMatrix& m,
                                                   const Eigen::MatrixXd& x) {
  const auto& a = solver.matrix().storage();
  const auto& ms = m.storage();
  Eigen::MatrixXd y(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) y.col(j) = solver.solve(ms * x.col(j));
  const Eigen::MatrixXd my = ms * y;
  Eigen::MatrixXd ay = a * y;
  Eigen::MatrixXd ga = y.transpose() * ay;
  Eigen::MatrixXd gm = y.transpose() * my;
  ga = 0.5 * (ga + ga.transpose()).eval();
  gm = 0.5 * (gm + gm.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(ga, gm);
  if (es.info() != Eigen::Success) throw ConvergenceError("smallest_eigenpairs: Rayleigh-Ritz step failed", {});
  Eigen::MatrixXd z = es.eigenvectors();
  // normalize in the M inner product of the projected problem
  for (Eigen::Index j = 0; j < z.cols(); ++j) z.col(j) /= std::sqrt(z.col(j).dot(gm * z.col(j)));
  return {es.eigenvalues(), y * z};
}

}  // namespace

double eigen_backward_error(const SparseMatrix& a, const SparseMatrix& m, double lambda, const Eigen::VectorXd& x) {
  const Eigen::VectorXd r = a.multiply(x) - lambda * m.multiply(x);
  const double denom = (a.norm_inf() + std::abs(lambda) * m.norm_inf()) * x.norm();
  return denom > 0.0 ? r.norm() / denom : r.norm();
}

EigenResult smallest_eigenpairs(const SparseMatrix& a, const SparseMatrix& m, int k, const EigenOptions& options) {
  if (a.dimension() != m.dimension()) throw InputError("smallest_eigenpairs: A and M differ in dimension");
  if (k > a.dimension()) throw InputError("smallest_eigenpairs: K exceeds the problem dimension");
  const SpdSolver solver(a);
  return smallest_eigenpairs(solver, m, k, options);
}

EigenResult smallest_eigenpairs(const SpdSolver& a_solver, const SparseMatrix& m, int k, const EigenOptions& options) {
  const SparseMatrix& a = a_solver.matrix();
  const int n = a.dimension();
  if (m.dimension() != n) throw InputError("smallest_eigenpairs: A and M differ in dimension");
  if (k < 0) throw InputError("smallest_eigenpairs: K must be non-negative");
  if (k > n) throw InputError("smallest_eigenpairs: K = " + std::to_string(k) + " exceeds dimension " + std::to_string(n));

  EigenResult result;
  if (k == 0) {
    result.eigenvalues.resize(0);
    result.eigenvectors.resize(n, 0);
    result.residuals.resize(0);
    return result;
  }

  const int dim = std::min(options.krylov_dim > 0 ? options.krylov_dim : std::max(2 * k + 20, 40), n);
  KrylovSchur ks(a_solver, m, dim, options.seed);
  ks.start();

  std::vector<double> best(static_cast<std::size_t>(k), std::numeric_limits<double>::infinity());
  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    ks.expand();
    const auto r = ks.ritz();
    const int wanted = std::min(k, ks.dim());
    const double theta_max = std::abs(r.theta[0]);

    bool settled = wanted == k;
    for (int i = 0; i < wanted; ++i) {
      const double estimate = std::abs(r.beta * r.y(ks.dim() - 1, i));
      if (!(r.theta[i] > 0.0) || estimate > options.tolerance * theta_max) settled = false;
    }

    if (settled) {
      Eigen::MatrixXd ritz_vectors(n, k);
      for (int i = 0; i < k; ++i) ritz_vectors.col(i) = ks.ritz_vector(r, i);
      auto [lambdas, vectors] = polish(a_solver, m, ritz_vectors);
      Eigen::VectorXd residuals(k);
      bool converged = true;
      for (int i = 0; i < k; ++i) {
        residuals[i] = eigen_backward_error(a, m, lambdas[i], vectors.col(i));
        best[static_cast<std::size_t>(i)] = std::min(best[static_cast<std::size_t>(i)], residuals[i]);
        if (!(residuals[i] <= options.residual_bound)) converged = false;
      }
      if (converged) {
        for (int i = 0; i < k; ++i) fix_sign(vectors.col(i));
        result.eigenvalues = std::move(lambdas);
        result.eigenvectors = std::move(vectors);
        result.residuals = std::move(residuals);
        result.restarts = restart;
        return result;
      }
    } else {
      for (int i = 0; i < wanted; ++i) {
        const double backward = eigen_backward_error(a, m, 1.0 / r.theta[i], ks.ritz_vector(r, i));
        best[static_cast<std::size_t>(i)] = std::min(best[static_cast<std::size_t>(i)], backward);
      }
    }

    if (restart == options.max_restarts) break;
    const int keep = std::clamp(k + (ks.dim() - k) / 2, k, ks.dim() - 1);
    ks.restart(r, keep);
  }
  throw ConvergenceError("smallest_eigenpairs: no convergence after " + std::to_string(options.max_restarts) + " restarts",
                         best);
}

DenseSpectrum dense_generalized_eig(const Eigen::MatrixXd& a, const Eigen::MatrixXd& m) {
  const auto n = a.rows();
  if (a.cols() != n || m.rows() != n || m.cols() != n) throw InputError("dense_generalized_eig: shape mismatch");
  if (n > 500) throw InputError("dense_generalized_eig: n > 500");
  const Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw InputError("dense_generalized_eig: M is not SPD");
  Eigen::MatrixXd c = llt.matrixL().solve(a);
  c = llt.matrixL().solve(c.transpose()).transpose();
  c = 0.5 * (c + c.transpose()).eval();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  if (es.info() != Eigen::Success) throw SolveError("dense_generalized_eig: eigensolve failed");
  DenseSpectrum out;
  out.eigenvalues = es.eigenvalues();
  out.eigenvectors = llt.matrixU().solve(es.eigenvectors());
  for (Eigen::Index i = 0; i < n; ++i) fix_sign(out.eigenvectors.col(i));
  return out;
}

}  // namespace asd
