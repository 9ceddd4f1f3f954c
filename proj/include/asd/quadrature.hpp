#pragma once

#include "asd/media.hpp"
#include "asd/mesh.hpp"

#include <array>
#include <vector>

namespace asd {

/// Symmetric quadrature rule on a triangle in barycentric form. Weights sum to 1; the integral
/// over a triangle T is area(T) * sum_i w_i f(x_i).
struct TriangleRule {
  static constexpr int kPoints = 19;
  std::array<Eigen::Vector3d, kPoints> points;
  std::array<double, kPoints> weights;
};

/// 19-point rule of polynomial degree 8 (the degree-8 rule of TOMS 584, CUBTRI).
const TriangleRule& rule_deg8_19pt();

double integrate_on_element(const Mesh& mesh, int t, const PointFunction& f,
                            const TriangleRule& rule = rule_deg8_19pt());

/// Values of an exact (generally discontinuous) field at every quadrature point of every element.
/// Sampling once lets many inner products reuse the expensive point evaluations.
class SampledField {
 public:
  SampledField(std::shared_ptr<const Mesh> mesh, const PointFunction& f, const TriangleRule& rule = rule_deg8_19pt());

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  const TriangleRule& rule() const { return *rule_; }
  double value(int t, int q) const { return values_[static_cast<std::size_t>(t) * TriangleRule::kPoints + q]; }

  /// <f, v> for a P1 function v on the same mesh.
  double inner_product(const FeFunction& v) const;
  /// <f, v_j> for every column v_j of nodal coefficient vectors.
  Eigen::VectorXd inner_products(const Eigen::MatrixXd& nodal_columns) const;
  /// ||f - v||_{L2}.
  double l2_distance(const FeFunction& v) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  const TriangleRule* rule_;
  std::vector<double> values_;
  std::vector<double> areas_;
};

/// ||u - v||_{L2(Omega)} with u given pointwise, integrated element by element with the 19-point rule.
double l2_error_exact_vs_fe(const PointFunction& u, const FeFunction& v);

}  // namespace asd
