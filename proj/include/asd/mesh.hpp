#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace asd {

using Point = Eigen::Vector2d;

struct Rectangle {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 1.0;
  double ymax = 1.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double area() const { return width() * height(); }
  bool valid() const { return xmax > xmin && ymax > ymin; }
  bool contains(const Point& p) const {
    return p.x() >= xmin && p.x() <= xmax && p.y() >= ymin && p.y() <= ymax;
  }
  friend bool operator==(const Rectangle&, const Rectangle&) = default;
};

inline constexpr Rectangle kUnitSquare{0.0, 0.0, 1.0, 1.0};

using Triangle = std::array<int, 3>;

/// Area and the (constant) gradients of the three barycentric basis functions of a P1 element.
struct ElementGeometry {
  double area = 0.0;
  std::array<Eigen::Vector2d, 3> gradients;
};

/// Location of a point inside the mesh.
struct MeshLocation {
  int triangle = -1;
  Eigen::Vector3d barycentric;
};

/// Uniform structured triangulation of an axis-aligned rectangle.
///
/// Vertices are stored row-major (index = iy*(nx+1) + ix). Each grid cell is split along the
/// diagonal from its lower-left to its upper-right corner; triangles 2c and 2c+1 belong to
/// cell c = iy*nx + ix and are counterclockwise. Immutable after construction.
class Mesh {
 public:
  Mesh(const Rectangle& domain, int nx, int ny);

  const Rectangle& domain() const { return domain_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hx() const { return domain_.width() / nx_; }
  double hy() const { return domain_.height() / ny_; }
  /// The mesh-size parameter delta = max(hx, hy).
  double h() const;

  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int triangle_count() const { return static_cast<int>(triangles_.size()); }
  int vertex_index(int ix, int iy) const { return iy * (nx_ + 1) + ix; }

  std::span<const Point> vertices() const { return vertices_; }
  std::span<const Triangle> triangles() const { return triangles_; }
  const Point& vertex(int i) const { return vertices_.at(static_cast<std::size_t>(i)); }
  const Triangle& triangle(int t) const { return triangles_.at(static_cast<std::size_t>(t)); }
  const std::vector<std::uint8_t>& boundary_mask() const { return boundary_mask_; }
  bool on_boundary(int i) const { return boundary_mask_.at(static_cast<std::size_t>(i)) != 0; }
  int boundary_vertex_count() const;

  /// Triangle containing `p` (closed), with barycentric coordinates. Empty if p is outside.
  std::optional<MeshLocation> locate(const Point& p) const;

  /// Physical point of barycentric coordinates `lambda` in triangle t.
  Point map_point(int t, const Eigen::Vector3d& lambda) const;

 private:
  Rectangle domain_;
  int nx_;
  int ny_;
  std::vector<Point> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<std::uint8_t> boundary_mask_;
};

Mesh build_uniform_mesh(const Rectangle& domain, int nx, int ny);

ElementGeometry triangle_geometry(const Point& p0, const Point& p1, const Point& p2);
ElementGeometry element_geometry(const Mesh& mesh, int t);

}  // namespace asd
