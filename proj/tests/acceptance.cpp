// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.

#include "asd/eigensolver.hpp"
#include "asd/errors.hpp"
#include "asd/experiments.hpp"
#include "asd/fem.hpp"
#include "asd/quadrature.hpp"
#include "asd/spectral.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace asd;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string out_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("asd_acceptance_" + name);
  std::filesystem::create_directories(dir);
  return dir.string();
}

ExperimentConfig config_for(const std::string& preset, std::vector<int> levels, std::vector<double> eps, int k,
                            const std::string& dir) {
  std::ostringstream s;
  s << R"({"medium":{"preset":")" << preset << R"("},"mesh":{"h0":0.05,"levels":[)";
  for (std::size_t i = 0; i < levels.size(); ++i) s << (i ? "," : "") << levels[i];
  s << R"(]},"epsilons":[)";
  for (std::size_t i = 0; i < eps.size(); ++i) s << (i ? "," : "") << format_number(eps[i]);
  s << R"(],"K":)" << k << R"(,"seed":1})";
  ExperimentConfig c = parse_config(s.str());
  c.out_dir = out_dir(dir);
  return c;
}

std::vector<double> column(const CsvTable& t, std::size_t col, bool skip_slope = true) {
  std::vector<double> v;
  for (const auto& row : t.rows) {
    if (skip_slope && row[0] == "slope") continue;
    v.push_back(std::stod(row[col]));
  }
  return v;
}

double slope_row(const CsvTable& t, std::size_t col) {
  for (const auto& row : t.rows) {
    if (row[0] == "slope") return std::stod(row[col]);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

bool in_range(double v, double lo, double hi) { return v >= lo && v <= hi; }

SparseMatrix to_sparse(const Eigen::MatrixXd& dense) {
  SparseMatrix::Storage s = dense.sparseView(1.0, 0.0);
  s.makeCompressed();
  return SparseMatrix(std::move(s), true);
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// ---------------------------------------------------------------------------------------------

Outcome quadrature_exactness() {
  const auto& rule = rule_deg8_19pt();
  const auto integrate = [&](int a, int b) {
    double s = 0.0;
    for (int i = 0; i < TriangleRule::kPoints; ++i)
      s += rule.weights[i] * std::pow(rule.points[i][1], a) * std::pow(rule.points[i][2], b);
    return 0.5 * s;
  };
  double worst8 = 0.0, best9 = 0.0;
  for (int d = 0; d <= 9; ++d) {
    for (int a = 0; a <= d; ++a) {
      const double exact = factorial(a) * factorial(d - a) / factorial(d + 2);
      const double rel = std::abs(integrate(a, d - a) - exact) / exact;
      if (d <= 8) worst8 = std::max(worst8, rel);
      else best9 = std::max(best9, rel);
    }
  }
  return {worst8 < 1e-13 && best9 > 1e-13,
          "max rel err deg<=8 " + fmt(worst8) + ", max rel err deg 9 " + fmt(best9)};
}

Outcome assembly_oracle() {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> w(0.1, 10.0);
  double worst = 0.0;
  const std::pair<int, int> sizes[] = {{1, 1}, {2, 2}, {3, 5}, {9, 9}, {4, 7}};
  for (const auto& [nx, ny] : sizes) {
    const Mesh mesh = build_uniform_mesh({0.0, 0.0, 1.5, 1.0}, nx, ny);
    std::vector<double> weights(static_cast<std::size_t>(mesh.triangle_count()));
    for (auto& x : weights) x = w(rng);
    const int n = mesh.vertex_count();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n), m = Eigen::MatrixXd::Zero(n, n);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
      const auto& tri = mesh.triangle(t);
      Eigen::Matrix2d jac;
      jac.col(0) = mesh.vertex(tri[1]) - mesh.vertex(tri[0]);
      jac.col(1) = mesh.vertex(tri[2]) - mesh.vertex(tri[0]);
      const double area = 0.5 * std::abs(jac.determinant());
      const Eigen::Matrix2d g = jac.inverse().transpose();
      const Eigen::Vector2d ref[3] = {{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          a(tri[i], tri[j]) += weights[static_cast<std::size_t>(t)] * area * (g * ref[i]).dot(g * ref[j]);
          m(tri[i], tri[j]) += area * (i == j ? 2.0 : 1.0) / 12.0;
        }
      }
    }
    worst = std::max(worst, (assemble_weighted_stiffness(mesh, weights).to_dense() - a).cwiseAbs().maxCoeff());
    worst = std::max(worst, (assemble_mass(mesh).to_dense() - m).cwiseAbs().maxCoeff());
  }
  const Mesh two = build_uniform_mesh(kUnitSquare, 2, 2);
  const std::vector<double> ones(static_cast<std::size_t>(two.triangle_count()), 1.0);
  const Eigen::MatrixXd reduced = reduce_dirichlet(assemble_weighted_stiffness(two, ones), two).matrix.to_dense();
  const bool four = reduced.rows() == 1 && std::abs(reduced(0, 0) - 4.0) <= 1e-13;
  return {worst <= 1e-13 && four,
          "max entry diff " + fmt(worst) + ", 2x2 reduced stiffness " + (reduced.rows() == 1 ? fmt(reduced(0, 0)) : "?")};
}

Outcome eigensolver_oracle() {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> size(10, 200);
  std::uniform_real_distribution<double> u(-1.0, 1.0), keep(0.0, 1.0);
  double worst = 0.0;
  const int pairs = 24;
  for (int trial = 0; trial < pairs; ++trial) {
    const int n = size(rng);
    const auto random_spd = [&](double fill, double shift) {
      Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i == j || keep(rng) < fill) b(i, j) = u(rng);
      Eigen::MatrixXd s = b * b.transpose() + shift * Eigen::MatrixXd::Identity(n, n);
      return Eigen::MatrixXd(0.5 * (s + s.transpose()));
    };
    const Eigen::MatrixXd a = random_spd(0.05, 1e-2), m = random_spd(0.02, 1.0);
    const int k = 1 + trial % 6;
    const EigenResult r = smallest_eigenpairs(to_sparse(a), to_sparse(m), k);
    const auto oracle = dense_generalized_eig(a, m);
    for (int i = 0; i < k; ++i)
      worst = std::max(worst, std::abs(r.eigenvalues[i] - oracle.eigenvalues[i]) / oracle.eigenvalues[i]);
  }
  const Mesh mesh = build_uniform_mesh(kUnitSquare, 32, 32);
  const std::vector<double> ones(static_cast<std::size_t>(mesh.triangle_count()), 1.0);
  const EigenResult lap = smallest_eigenpairs(reduce_dirichlet(assemble_weighted_stiffness(mesh, ones), mesh).matrix,
                                              reduce_dirichlet(assemble_mass(mesh), mesh).matrix, 1);
  const double target = 2.0 * std::numbers::pi * std::numbers::pi;
  const double lap_rel = std::abs(lap.eigenvalues[0] - target) / target;
  return {worst <= 1e-8 && lap_rel <= 1e-2, std::to_string(pairs) + " random pairs, max rel eigenvalue diff " +
                                                fmt(worst) + "; Laplacian lambda_1 " + fmt(lap.eigenvalues[0]) +
                                                " (rel " + fmt(lap_rel) + ")"};
}

Outcome delta_rate() {
  const CsvTable t = run_convergence_delta(config_for("disc", {1, 2, 3, 4}, {1e-8}, 1, "c4"));
  const double slope = slope_row(t, 1);
  const double e1 = column(t, 1).front();
  const double ratio = e1 / 6.05e-2;
  return {in_range(slope, 0.4, 0.65) && ratio <= 3.0 && ratio >= 1.0 / 3.0,
          "slope " + fmt(slope) + ", error at m=1 " + fmt(e1) + " (x" + fmt(ratio) + " of 6.05e-2)"};
}

Outcome eps_rate() {
  const CsvTable t = run_convergence_eps(config_for("disc", {3}, {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}, 1, "c5"));
  const double slope = slope_row(t, 1);
  const double last = column(t, 1).back();
  return {in_range(slope, 0.85, 1.15) && last < 1e-4, "slope " + fmt(slope) + ", error at eps=1e-5 " + fmt(last)};
}

Outcome recovery_floor() {
  std::string detail;
  bool pass = true;
  for (const char* preset : {"disc", "square"}) {
    const CsvTable t = run_convergence_eps(config_for(preset, {3}, {1e-8}, 1, std::string("c6_") + preset));
    const double e = column(t, 1).front();
    pass = pass && e < 1e-6;
    detail += std::string(detail.empty() ? "" : ", ") + preset + " " + fmt(e);
  }
  return {pass, detail};
}

Outcome multi_inclusion() {
  const CsvTable d = run_convergence_delta(config_for("nonuniform_background", {1, 2, 3, 4}, {1e-8}, 4, "c7d"));
  const CsvTable e =
      run_convergence_eps(config_for("nonuniform_background", {3}, {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}, 4, "c7e"));
  const double ds = slope_row(d, 1), es = slope_row(e, 1);
  return {in_range(ds, 0.4, 0.65) && in_range(es, 0.85, 1.15), "delta-slope " + fmt(ds) + ", eps-slope " + fmt(es)};
}

Outcome lambda_bound() {
  const auto mesh = mesh_for_level(config_for("disc", {3}, {1e-8}, 1, "c8"), 3);
  const FeFunction u = interpolate_to_mesh(preset_medium("disc"), mesh);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  std::string detail = "lambda_1:";
  for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
    const SpectralBasis b = build_as_basis(u, {WeightForm::q_power, 2.0, eps}, 1);
    lo = std::min(lo, b.eigenvalues[0]);
    hi = std::max(hi, b.eigenvalues[0]);
    detail += " " + fmt(b.eigenvalues[0]);
  }
  return {lo > 0.0 && hi / lo < 2.0, detail + " (max/min " + fmt(hi / lo) + ")"};
}

Outcome inverse_problem() {
  ExperimentConfig c = config_for("nonuniform_background", {1}, {1e-2}, 25, "c9");
  const CsvTable t = run_invert(c);
  double er[3] = {0, 0, 0}, tau[3] = {0, 0, 0};
  int iterations = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    er[i] = std::stod(t.rows[i][1]);
    tau[i] = std::stod(t.rows[i][2]);
  }
  iterations = std::stoi(t.rows[0][3]);
  const bool tau_ok = tau[0] <= 1.1;
  const bool order_ok = er[0] <= er[1];
  const bool lu_ok = er[2] > 1e3 * er[1];
  std::string detail = "ASI tau " + fmt(tau[0]) + " after " + std::to_string(iterations) + " iterations" +
                       (tau_ok ? "" : " (needs <= 1.1)") + "; e_r ASI " + fmt(er[0]) + ", TSVD " + fmt(er[1]) +
                       " (tau " + fmt(tau[1]) + "), LU " + fmt(er[2]);
  return {tau_ok && order_ok && lu_ok, detail};
}

Outcome property_suites() {
  std::mt19937_64 rng(2718);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> logeps(-9.0, 0.0), logt(-12.0, 6.0), q(1.0, 4.0);
  int checks = 0, failures = 0;
  const auto check = [&](bool ok) {
    ++checks;
    if (!ok) ++failures;
  };

  // weight bounds
  for (int i = 0; i < 500; ++i) {
    const WeightSpec spec{i % 2 ? WeightForm::max : WeightForm::q_power, q(rng), std::pow(10.0, logeps(rng))};
    const double t = std::pow(10.0, logt(rng));
    check(t * weight_on_element(t, spec) <= 1.0 + 1e-14);
    check(std::abs(weight_on_element(0.0, spec) * spec.epsilon - 1.0) <= 1e-12);
  }

  const auto mesh = std::make_shared<const Mesh>(build_uniform_mesh(kUnitSquare, 24, 24));
  const auto random_fe = [&] {
    Eigen::VectorXd c(mesh->vertex_count());
    for (auto& v : c) v = gauss(rng);
    return FeFunction(mesh, c);
  };
  for (const char* preset : {"disc", "four_squares", "nonuniform_background"}) {
    const FeFunction u = interpolate_to_mesh(preset_medium(preset), mesh);
    const WeightSpec spec{WeightForm::q_power, 2.0, std::pow(10.0, logeps(rng))};
    const SpectralBasis basis = build_as_basis(u, spec, 6);

    // M-orthonormality
    const Eigen::MatrixXd gram = basis.modes.transpose() * basis.mass_modes;
    check((gram - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-10);

    for (int trial = 0; trial < 5; ++trial) {
      const FeFunction v = random_fe();
      const double vn = l2_norm_fe(v);
      const FeFunction p = orthogonal_projection(basis, v).function;
      check(l2_error_fe(orthogonal_projection(basis, p).function, p) <= 1e-10 * vn);
      check(l2_norm_fe(p) <= vn * (1.0 + 1e-10));
      double prev = vn;
      for (int k = 1; k <= 6; ++k) {
        SpectralBasis sub = basis;
        sub.modes = basis.modes.leftCols(k);
        sub.mass_modes = basis.mass_modes.leftCols(k);
        const double err = l2_error_fe(v, orthogonal_projection(sub, v).function);
        check(err <= prev * (1.0 + 1e-10));
        prev = err;
      }
    }

    // lifting: constants are reproduced, boundary data enter linearly
    const SparseMatrix a = assemble_stiffness(*mesh, u, spec);
    const DirichletReduction red = make_dirichlet_reduction(*mesh);
    const SpdSolver solver(reduce_dirichlet(a, *mesh).matrix);
    const double c = 3.0 * gauss(rng);
    const std::vector<double> constant(red.boundary.size(), c);
    const FeFunction lc = solve_lifting(a, solver, red, mesh, constant);
    check((lc.coefficients.array() - c).abs().maxCoeff() <= 1e-12 * std::max(1.0, std::abs(c)));

    std::vector<double> g1(red.boundary.size()), g2(red.boundary.size()), g12(red.boundary.size());
    const double alpha = gauss(rng), beta = gauss(rng);
    for (std::size_t i = 0; i < g1.size(); ++i) {
      g1[i] = gauss(rng);
      g2[i] = gauss(rng);
      g12[i] = alpha * g1[i] + beta * g2[i];
    }
    const Eigen::VectorXd combo = alpha * solve_lifting(a, solver, red, mesh, g1).coefficients +
                                  beta * solve_lifting(a, solver, red, mesh, g2).coefficients;
    const FeFunction l12 = solve_lifting(a, solver, red, mesh, g12);
    // linearity measured by the interior residual of the combined lifting, relative to the data
    const SparseMatrix ab = interior_boundary_block(a, red);
    const Eigen::VectorXd gvec = Eigen::Map<const Eigen::VectorXd>(g12.data(), static_cast<Eigen::Index>(g12.size()));
    const Eigen::VectorXd rhs = ab.multiply(gvec);
    const Eigen::VectorXd res = solver.matrix().multiply(red.restrict_to_interior(combo)) + rhs;
    check(res.norm() <= 1e-10 * rhs.norm());
    check((l12.coefficients - combo).norm() <= 1e-6 * combo.norm());
  }
  return {failures == 0, std::to_string(checks - failures) + "/" + std::to_string(checks) + " randomized checks"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"quadrature exactness", 1.0, quadrature_exactness},
      {"assembly oracle", 1.0, assembly_oracle},
      {"eigensolver oracle", 30.0, eigensolver_oracle},
      {"delta-rate, disc", 300.0, delta_rate},
      {"eps-rate, disc", 180.0, eps_rate},
      {"recovery floor, disc and square", 120.0, recovery_floor},
      {"multi-inclusion, K=4", 600.0, multi_inclusion},
      {"lambda_1 lower bound", 120.0, lambda_bound},
      {"inverse problem", 600.0, inverse_problem},
      {"property suites", 60.0, property_suites},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s criterion %zu (%s): %s; %.2f s of %.0f s%s\n", pass ? "PASS" : "FAIL", i + 1, c.name,
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : " (over budget)");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
