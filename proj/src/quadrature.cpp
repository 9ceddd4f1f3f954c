#include "asd/quadrature.hpp"

#include "asd/errors.hpp"

#include <cmath>

namespace asd {
namespace {

TriangleRule make_rule() {
  // Radon's degree-5 rule (centroid and the orbits s1, s2) extended by 12 points: orbits s3, s4
  // and the six permutations of (s3, s4, 1 - s3 - s4).
  constexpr double w0 = 0.037861091200314683308308221356;
  constexpr double w1 = 0.0376204254131829721443140052132, s1 = 0.101286507323456338800987361915;
  constexpr double w2 = 0.0783573522441173375554460008942, s2 = 0.470142064105115089770441209513;
  constexpr double w3 = 0.0134442673751654018981110650532, s3 = 0.029480860884439566720184810149;
  constexpr double w4 = 0.116271479656965896394748705655, s4 = 0.232102326775050367668524550558;
  constexpr double w5 = 0.0375097224552317487856387413662, s5 = 0.738416812340510065611290639293;

  TriangleRule r;
  int k = 0;
  auto add = [&](double w, double l0, double l1, double l2) {
    r.points[k] = Eigen::Vector3d(l0, l1, l2);
    r.weights[k] = w;
    ++k;
  };
  add(w0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
  for (auto [w, t] : {std::array{w1, s1}, std::array{w2, s2}, std::array{w3, s3}, std::array{w4, s4}}) {
    const double c = 1.0 - 2.0 * t;
    add(w, c, t, t);
    add(w, t, c, t);
    add(w, t, t, c);
  }
  add(w5, s3, s4, s5);
  add(w5, s3, s5, s4);
  add(w5, s4, s3, s5);
  add(w5, s4, s5, s3);
  add(w5, s5, s3, s4);
  add(w5, s5, s4, s3);
  return r;
}

}  // namespace

const TriangleRule& rule_deg8_19pt() {
  static const TriangleRule rule = make_rule();
  return rule;
}

double integrate_on_element(const Mesh& mesh, int t, const PointFunction& f, const TriangleRule& rule) {
  const double area = element_geometry(mesh, t).area;
  double sum = 0.0;
  for (int q = 0; q < TriangleRule::kPoints; ++q) sum += rule.weights[q] * f(mesh.map_point(t, rule.points[q]));
  return area * sum;
}

SampledField::SampledField(std::shared_ptr<const Mesh> mesh, const PointFunction& f, const TriangleRule& rule)
    : mesh_(std::move(mesh)), rule_(&rule) {
  if (!mesh_) throw InputError("SampledField: null mesh");
  const int nt = mesh_->triangle_count();
  values_.resize(static_cast<std::size_t>(nt) * TriangleRule::kPoints);
  areas_.resize(static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) {
    areas_[static_cast<std::size_t>(t)] = element_geometry(*mesh_, t).area;
    for (int q = 0; q < TriangleRule::kPoints; ++q)
      values_[static_cast<std::size_t>(t) * TriangleRule::kPoints + q] = f(mesh_->map_point(t, rule.points[q]));
  }
}

double SampledField::inner_product(const FeFunction& v) const {
  Eigen::MatrixXd col = v.coefficients;
  return inner_products(col)[0];
}

Eigen::VectorXd SampledField::inner_products(const Eigen::MatrixXd& nodal_columns) const {
  if (nodal_columns.rows() != mesh_->vertex_count()) throw InputError("SampledField: vector size does not match mesh");
  const auto& rule = *rule_;
  Eigen::VectorXd result = Eigen::VectorXd::Zero(nodal_columns.cols());
  Eigen::VectorXd local(nodal_columns.cols());
  for (int t = 0; t < mesh_->triangle_count(); ++t) {
    const Triangle& tri = mesh_->triangle(t);
    local.setZero();
    for (int q = 0; q < TriangleRule::kPoints; ++q) {
      const double fq = rule.weights[q] * value(t, q);
      if (fq == 0.0) continue;
      const Eigen::Vector3d& l = rule.points[q];
      local += fq * (l[0] * nodal_columns.row(tri[0]) + l[1] * nodal_columns.row(tri[1]) + l[2] * nodal_columns.row(tri[2]))
                        .transpose();
    }
    result += areas_[static_cast<std::size_t>(t)] * local;
  }
  return result;
}

double SampledField::l2_distance(const FeFunction& v) const {
  if (v.size() != mesh_->vertex_count()) throw InputError("SampledField: function lives on a different mesh");
  const auto& rule = *rule_;
  double total = 0.0;
  for (int t = 0; t < mesh_->triangle_count(); ++t) {
    double local = 0.0;
    for (int q = 0; q < TriangleRule::kPoints; ++q) {
      const double diff = value(t, q) - v.evaluate(t, rule.points[q]);
      local += rule.weights[q] * diff * diff;
    }
    total += areas_[static_cast<std::size_t>(t)] * local;
  }
  return std::sqrt(total);
}

double l2_error_exact_vs_fe(const PointFunction& u, const FeFunction& v) {
  return SampledField(v.mesh, u).l2_distance(v);
}

}  // namespace asd
