#include "asd/mesh.hpp"

#include "asd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace asd {

Mesh::Mesh(const Rectangle& domain, int nx, int ny) : domain_(domain), nx_(nx), ny_(ny) {
  if (!domain.valid()) throw InputError("mesh: degenerate rectangle");
  if (nx < 1 || ny < 1) throw InputError("mesh: cell counts must be positive");

  const double hx = domain.width() / nx;
  const double hy = domain.height() / ny;
  vertices_.reserve(static_cast<std::size_t>(nx + 1) * static_cast<std::size_t>(ny + 1));
  boundary_mask_.reserve(vertices_.capacity());
  for (int iy = 0; iy <= ny; ++iy) {
    // The last row/column is pinned to the rectangle edge so that boundary detection is exact.
    const double y = iy == ny ? domain.ymax : domain.ymin + iy * hy;
    for (int ix = 0; ix <= nx; ++ix) {
      const double x = ix == nx ? domain.xmax : domain.xmin + ix * hx;
      vertices_.emplace_back(x, y);
      const bool boundary = x == domain.xmin || x == domain.xmax || y == domain.ymin || y == domain.ymax;
      boundary_mask_.push_back(boundary ? 1 : 0);
    }
  }

  triangles_.reserve(2 * static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const int v00 = vertex_index(ix, iy);
      const int v10 = v00 + 1;
      const int v01 = vertex_index(ix, iy + 1);
      const int v11 = v01 + 1;
      triangles_.push_back({v00, v10, v11});
      triangles_.push_back({v00, v11, v01});
    }
  }
}

double Mesh::h() const { return std::max(hx(), hy()); }

int Mesh::boundary_vertex_count() const {
  return static_cast<int>(std::count(boundary_mask_.begin(), boundary_mask_.end(), std::uint8_t{1}));
}

std::optional<MeshLocation> Mesh::locate(const Point& p) const {
  if (!domain_.contains(p)) return std::nullopt;
  const double sx = (p.x() - domain_.xmin) / hx();
  const double sy = (p.y() - domain_.ymin) / hy();
  const int ix = std::clamp(static_cast<int>(std::floor(sx)), 0, nx_ - 1);
  const int iy = std::clamp(static_cast<int>(std::floor(sy)), 0, ny_ - 1);
  const double fx = sx - ix;
  const double fy = sy - iy;
  const int cell = iy * nx_ + ix;

  MeshLocation loc;
  if (fy <= fx) {
    // lower triangle (v00, v10, v11)
    loc.triangle = 2 * cell;
    loc.barycentric = {1.0 - fx, fx - fy, fy};
  } else {
    // upper triangle (v00, v11, v01)
    loc.triangle = 2 * cell + 1;
    loc.barycentric = {1.0 - fy, fx, fy - fx};
  }
  return loc;
}

Point Mesh::map_point(int t, const Eigen::Vector3d& lambda) const {
  const Triangle& tri = triangles_[static_cast<std::size_t>(t)];
  return lambda[0] * vertices_[tri[0]] + lambda[1] * vertices_[tri[1]] + lambda[2] * vertices_[tri[2]];
}

Mesh build_uniform_mesh(const Rectangle& domain, int nx, int ny) { return Mesh(domain, nx, ny); }

ElementGeometry triangle_geometry(const Point& p0, const Point& p1, const Point& p2) {
  const Eigen::Vector2d e1 = p1 - p0;
  const Eigen::Vector2d e2 = p2 - p0;
  const double det = e1.x() * e2.y() - e1.y() * e2.x();
  if (!(det > 0.0)) throw InputError("triangle_geometry: triangle is degenerate or clockwise");

  ElementGeometry g;
  g.area = 0.5 * det;
  // Rows of the inverse Jacobian give the gradients of lambda1, lambda2.
  g.gradients[1] = Eigen::Vector2d(e2.y(), -e2.x()) / det;
  g.gradients[2] = Eigen::Vector2d(-e1.y(), e1.x()) / det;
  g.gradients[0] = -g.gradients[1] - g.gradients[2];
  return g;
}

ElementGeometry element_geometry(const Mesh& mesh, int t) {
  if (t < 0 || t >= mesh.triangle_count())
    throw InputError("element_geometry: triangle index " + std::to_string(t) + " out of range");
  const Triangle& tri = mesh.triangle(t);
  return triangle_geometry(mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2]));
}

}  // namespace asd
