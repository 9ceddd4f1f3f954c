#include "asd/media.hpp"

#include "asd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace asd {
namespace {

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

double segment_distance(const Point& p, const Point& a, const Point& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  const double s = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + s * ab)).norm();
}

bool on_segment(const Point& p, const Point& a, const Point& b) {
  if (cross(b - a, p - a) != 0.0) return false;
  return p.x() >= std::min(a.x(), b.x()) && p.x() <= std::max(a.x(), b.x()) &&
         p.y() >= std::min(a.y(), b.y()) && p.y() <= std::max(a.y(), b.y());
}

bool segments_intersect(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  return on_segment(c, a, b) || on_segment(d, a, b) || on_segment(a, c, d) || on_segment(b, c, d);
}

double signed_area(const Polygon& poly) {
  double a = 0.0;
  const std::size_t n = poly.vertices.size();
  for (std::size_t i = 0; i < n; ++i) a += cross(poly.vertices[i], poly.vertices[(i + 1) % n]);
  return 0.5 * a;
}

bool polygon_contains(const Polygon& poly, const Point& p) {
  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i)
    if (on_segment(p, v[i], v[(i + 1) % n])) return true;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if ((v[i].y() > p.y()) != (v[j].y() > p.y())) {
      const double x_cross = v[j].x() + (p.y() - v[j].y()) * (v[i].x() - v[j].x()) / (v[i].y() - v[j].y());
      if (p.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

double polygon_outline_distance(const Polygon& poly, const Point& p) {
  double d = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.vertices.size();
  for (std::size_t i = 0; i < n; ++i) d = std::min(d, segment_distance(p, poly.vertices[i], poly.vertices[(i + 1) % n]));
  return d;
}

// Angle of `dir` relative to `start`, in [0, 2pi).
double relative_angle(const Eigen::Vector2d& dir, double start) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::atan2(dir.y(), dir.x()) - start;
  a = std::fmod(a, two_pi);
  if (a < 0.0) a += two_pi;
  return a;
}

double sector_width(const SectorComplement& s) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(s.angle_end - s.angle_start, two_pi);
  if (w < 0.0) w += two_pi;
  return w;
}

bool in_open_sector(const SectorComplement& s, const Point& p) {
  const Eigen::Vector2d d = p - s.center;
  if (d.x() == 0.0 && d.y() == 0.0) return false;
  const double a = relative_angle(d, s.angle_start);
  return a > 0.0 && a < sector_width(s);
}

struct ContainsVisitor {
  const Point& p;
  bool operator()(const Disc& d) const { return (p - d.center).squaredNorm() <= d.radius * d.radius; }
  bool operator()(const Box& b) const {
    return p.x() >= b.corner_min.x() && p.x() <= b.corner_max.x() && p.y() >= b.corner_min.y() &&
           p.y() <= b.corner_max.y();
  }
  bool operator()(const Polygon& poly) const { return polygon_contains(poly, p); }
  bool operator()(const SectorComplement& s) const {
    if ((p - s.center).squaredNorm() > s.radius * s.radius) return false;
    return !in_open_sector(s, p);
  }
  bool operator()(const Star& s) const { return polygon_contains(s.outline(), p); }
};

struct DistanceVisitor {
  const Point& p;
  double operator()(const Disc& d) const { return std::abs((p - d.center).norm() - d.radius); }
  double operator()(const Box& b) const {
    Polygon poly{{b.corner_min, {b.corner_max.x(), b.corner_min.y()}, b.corner_max, {b.corner_min.x(), b.corner_max.y()}}};
    return polygon_outline_distance(poly, p);
  }
  double operator()(const Polygon& poly) const { return polygon_outline_distance(poly, p); }
  double operator()(const SectorComplement& s) const {
    const Point a = s.center + s.radius * Eigen::Vector2d(std::cos(s.angle_start), std::sin(s.angle_start));
    const Point b = s.center + s.radius * Eigen::Vector2d(std::cos(s.angle_end), std::sin(s.angle_end));
    double d = std::min(segment_distance(p, s.center, a), segment_distance(p, s.center, b));
    if (in_open_sector(s, p)) {
      d = std::min({d, (p - a).norm(), (p - b).norm()});
    } else {
      d = std::min(d, std::abs((p - s.center).norm() - s.radius));
    }
    return d;
  }
  double operator()(const Star& s) const { return polygon_outline_distance(s.outline(), p); }
};

struct ValidateVisitor {
  void operator()(const Disc& d) const {
    if (!(d.radius > 0.0)) throw InputError("disc: radius must be positive");
  }
  void operator()(const Box& b) const {
    if (!(b.corner_max.x() > b.corner_min.x() && b.corner_max.y() > b.corner_min.y()))
      throw InputError("rectangle: corner_max must exceed corner_min");
  }
  void operator()(const Polygon& poly) const {
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    if (n < 3) throw InputError("polygon: needs at least 3 vertices");
    if (!(signed_area(poly) > 0.0)) throw InputError("polygon: must be counterclockwise with nonzero area");
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
        if (adjacent) continue;
        if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]))
          throw InputError("polygon: edges intersect, polygon is not simple");
      }
    }
  }
  void operator()(const SectorComplement& s) const {
    if (!(s.radius > 0.0)) throw InputError("sector_complement: radius must be positive");
  }
  void operator()(const Star& s) const {
    if (s.n_points < 2) throw InputError("star: needs at least 2 points");
    if (!(s.r_inner > 0.0 && s.r_outer > s.r_inner)) throw InputError("star: need 0 < r_inner < r_outer");
  }
};

}  // namespace

Polygon Star::outline() const {
  Polygon poly;
  poly.vertices.reserve(2 * static_cast<std::size_t>(n_points));
  for (int i = 0; i < 2 * n_points; ++i) {
    const double angle = std::numbers::pi / 2.0 + i * std::numbers::pi / n_points;
    const double r = i % 2 == 0 ? r_outer : r_inner;
    poly.vertices.emplace_back(center.x() + r * std::cos(angle), center.y() + r * std::sin(angle));
  }
  return poly;
}

void validate_shape(const Shape& shape) { std::visit(ValidateVisitor{}, shape); }

bool shape_contains(const Shape& shape, const Point& p) { return std::visit(ContainsVisitor{p}, shape); }

double distance_to_outline(const Shape& shape, const Point& p) { return std::visit(DistanceVisitor{p}, shape); }

void Medium::validate() const {
  if (!domain.valid()) throw InputError("medium: domain rectangle has no area");
  for (const auto& piece : background)
    if (piece.shape) validate_shape(*piece.shape);
  for (const auto& inc : inclusions) {
    validate_shape(inc.shape);
    if (inc.value == 0.0) throw InputError("medium: inclusion values must be nonzero");
  }
}

std::vector<Shape> Medium::outlines() const {
  std::vector<Shape> out;
  for (const auto& piece : background)
    if (piece.shape) out.push_back(*piece.shape);
  for (const auto& inc : inclusions) out.push_back(inc.shape);
  return out;
}

double evaluate_medium(const Medium& m, const Point& p) {
  if (!m.domain.contains(p)) throw InputError("evaluate_medium: point outside the domain");
  double value = 0.0;
  for (const auto& piece : m.background) {
    if (!piece.shape || shape_contains(*piece.shape, p)) value = piece.value;
  }
  if (m.mode == InclusionMode::replace) {
    for (auto it = m.inclusions.rbegin(); it != m.inclusions.rend(); ++it) {
      if (shape_contains(it->shape, p)) return it->value;
    }
    return value;
  }
  for (const auto& inc : m.inclusions)
    if (shape_contains(inc.shape, p)) value += inc.value;
  return value;
}

Medium preset_medium(std::string_view name, double constant_value) {
  Medium m;
  m.domain = kUnitSquare;
  constexpr double deg = std::numbers::pi / 180.0;
  if (name == "disc") {
    m.inclusions.push_back({Disc{{0.5, 0.5}, 0.3}, 1.0});
  } else if (name == "square") {
    m.inclusions.push_back({Box{{0.2, 0.2}, {0.8, 0.8}}, 1.0});
  } else if (name == "pacman") {
    m.inclusions.push_back({SectorComplement{{0.5, 0.5}, 0.3, -30.0 * deg, 30.0 * deg}, 1.0});
  } else if (name == "star") {
    m.inclusions.push_back({Star{{0.5, 0.5}, 5, 0.35, 0.15}, 1.0});
  } else if (name == "four_squares") {
    m.inclusions.push_back({Box{{0.25, 0.25}, {0.5, 0.5}}, 1.0});
    m.inclusions.push_back({Box{{0.5, 0.25}, {0.75, 0.5}}, 2.0});
    m.inclusions.push_back({Box{{0.25, 0.5}, {0.5, 0.75}}, 3.0});
    m.inclusions.push_back({Box{{0.5, 0.5}, {0.75, 0.75}}, 4.0});
  } else if (name == "nonuniform_background") {
    // Five background pieces touching the boundary, four inclusions compactly inside.
    m.background.push_back({std::nullopt, 1.0});
    m.background.push_back({Box{{0.0, 0.75}, {0.35, 1.0}}, 2.0});
    m.background.push_back({Box{{0.75, 0.0}, {1.0, 0.3}}, 1.5});
    m.background.push_back({Disc{{1.0, 1.0}, 0.3}, 0.5});
    m.background.push_back({Polygon{{{0.0, 0.0}, {0.3, 0.0}, {0.0, 0.45}}}, 2.5});
    m.inclusions.push_back({Disc{{0.3, 0.45}, 0.1}, 3.0});
    m.inclusions.push_back({Box{{0.55, 0.45}, {0.75, 0.65}}, 2.0});
    {
      // regular hexagon, flat top and bottom
      Polygon hex;
      for (int i = 0; i < 6; ++i) {
        const double a = (30.0 + 60.0 * i) * deg;
        hex.vertices.push_back({0.51 + 0.09 * std::cos(a), 0.2 + 0.09 * std::sin(a)});
      }
      m.inclusions.push_back({hex, 0.2});
    }
    m.inclusions.push_back({SectorComplement{{0.55, 0.85}, 0.1, -30.0 * deg, 30.0 * deg}, 2.5});
  } else if (name == "constant") {
    m.background.push_back({std::nullopt, constant_value});
  } else {
    throw InputError("unknown medium preset '" + std::string(name) + "'");
  }
  return m;
}

void RasterMedium::validate() const {
  if (width < 1 || height < 1) throw InputError("raster: empty image");
  if (static_cast<std::size_t>(width) * static_cast<std::size_t>(height) != pixels.size())
    throw InputError("raster: pixel count does not match width*height");
  if (!domain.valid()) throw InputError("raster: domain rectangle has no area");
}

double RasterMedium::value_at(const Point& p) const {
  const double px = (p.x() - domain.xmin) / domain.width() * width;
  const double py = (domain.ymax - p.y()) / domain.height() * height;
  const int col = std::clamp(static_cast<int>(std::floor(px)), 0, width - 1);
  const int row = std::clamp(static_cast<int>(std::floor(py)), 0, height - 1);
  return pixels[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(col)];
}

FeFunction::FeFunction(std::shared_ptr<const Mesh> m, Eigen::VectorXd c) : mesh(std::move(m)), coefficients(std::move(c)) {
  if (!mesh) throw InputError("FeFunction: null mesh");
  if (coefficients.size() != mesh->vertex_count())
    throw InputError("FeFunction: coefficient count does not match vertex count");
}

FeFunction FeFunction::zeros(std::shared_ptr<const Mesh> m) {
  const int n = m->vertex_count();
  return FeFunction(std::move(m), Eigen::VectorXd::Zero(n));
}

FeFunction FeFunction::constant(std::shared_ptr<const Mesh> m, double c) {
  const int n = m->vertex_count();
  return FeFunction(std::move(m), Eigen::VectorXd::Constant(n, c));
}

double FeFunction::evaluate(const Point& p) const {
  const auto loc = mesh->locate(p);
  if (!loc) throw InputError("FeFunction::evaluate: point outside the mesh");
  return evaluate(loc->triangle, loc->barycentric);
}

double FeFunction::evaluate(int t, const Eigen::Vector3d& lambda) const {
  const Triangle& tri = mesh->triangle(t);
  return lambda[0] * coefficients[tri[0]] + lambda[1] * coefficients[tri[1]] + lambda[2] * coefficients[tri[2]];
}

Eigen::Vector2d FeFunction::gradient(int t) const {
  const ElementGeometry g = element_geometry(*mesh, t);
  const Triangle& tri = mesh->triangle(t);
  return coefficients[tri[0]] * g.gradients[0] + coefficients[tri[1]] * g.gradients[1] +
         coefficients[tri[2]] * g.gradients[2];
}

void require_same_mesh(const FeFunction& a, const FeFunction& b, const char* where) {
  if (!a.mesh || !b.mesh) throw InputError(std::string(where) + ": function without a mesh");
  if (a.mesh == b.mesh) return;
  const Mesh& ma = *a.mesh;
  const Mesh& mb = *b.mesh;
  if (!(ma.domain() == mb.domain() && ma.nx() == mb.nx() && ma.ny() == mb.ny()))
    throw InputError(std::string(where) + ": functions live on different meshes");
}

PointFunction evaluator(const Medium& m) {
  return [m](const Point& p) { return evaluate_medium(m, p); };
}

PointFunction evaluator(const RasterMedium& m) {
  return [m](const Point& p) { return m.value_at(p); };
}

namespace {

template <class F>
FeFunction interpolate_with(const Rectangle& domain, std::shared_ptr<const Mesh> mesh, F&& f) {
  if (!mesh) throw InputError("interpolate_to_mesh: null mesh");
  if (!(mesh->domain() == domain)) throw InputError("interpolate_to_mesh: mesh and medium domains differ");
  Eigen::VectorXd c(mesh->vertex_count());
  const auto verts = mesh->vertices();
  for (int i = 0; i < mesh->vertex_count(); ++i) c[i] = f(verts[static_cast<std::size_t>(i)]);
  return FeFunction(std::move(mesh), std::move(c));
}

}  // namespace

FeFunction interpolate_to_mesh(const Medium& m, std::shared_ptr<const Mesh> mesh) {
  m.validate();
  return interpolate_with(m.domain, std::move(mesh), [&m](const Point& p) { return evaluate_medium(m, p); });
}

FeFunction interpolate_to_mesh(const RasterMedium& m, std::shared_ptr<const Mesh> mesh) {
  m.validate();
  return interpolate_with(m.domain, std::move(mesh), [&m](const Point& p) { return m.value_at(p); });
}

}  // namespace asd
