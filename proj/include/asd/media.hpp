#pragma once

#include "asd/mesh.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace asd {

// ---------------------------------------------------------------------------------------------
// Shapes. All shapes are closed sets: points on the outline belong to the shape.

struct Disc {
  Point center{0.5, 0.5};
  double radius = 0.3;
};

struct Box {
  Point corner_min{0.2, 0.2};
  Point corner_max{0.8, 0.8};
};

/// Simple polygon, vertices counterclockwise.
struct Polygon {
  std::vector<Point> vertices;
};

/// Disc with the open angular sector (angle_start, angle_end) removed; angles in radians,
/// measured counterclockwise from the +x axis. The "Pac-Man".
struct SectorComplement {
  Point center{0.5, 0.5};
  double radius = 0.3;
  double angle_start = 0.0;
  double angle_end = 0.0;
};

/// Regular star with n_points tips; the outline is the 2n-vertex polygon alternating between
/// r_outer and r_inner, the first tip pointing along +y.
struct Star {
  Point center{0.5, 0.5};
  int n_points = 5;
  double r_outer = 0.35;
  double r_inner = 0.15;

  Polygon outline() const;
};

using Shape = std::variant<Disc, Box, Polygon, SectorComplement, Star>;

/// Throws InputError when shape parameters violate the shape's invariants.
void validate_shape(const Shape& shape);
bool shape_contains(const Shape& shape, const Point& p);
/// Euclidean distance from p to the outline of the shape.
double distance_to_outline(const Shape& shape, const Point& p);

// ---------------------------------------------------------------------------------------------

/// A piece of the background u0. An empty shape stands for "rest of the domain".
struct BackgroundPiece {
  std::optional<Shape> shape;
  double value = 0.0;
};

struct Inclusion {
  Shape shape;
  double value = 1.0;
};

enum class InclusionMode {
  replace,  ///< an inclusion's value overrides the background beneath it (default)
  additive  ///< inclusion values are added to the background, u = u0 + sum alpha_k chi_k
};

/// Piecewise-constant medium u = u0 + u~ on a rectangle.
///
/// The background value at p is that of the last background piece containing p (0 if none). In
/// replace mode the last inclusion containing p wins; in additive mode all containing inclusions
/// add their values to the background.
struct Medium {
  Rectangle domain = kUnitSquare;
  std::vector<BackgroundPiece> background;
  std::vector<Inclusion> inclusions;
  InclusionMode mode = InclusionMode::replace;

  /// Throws InputError on invalid shapes, zero inclusion values or an invalid domain.
  void validate() const;
  /// All shapes in the medium (background pieces with a shape, then inclusions).
  std::vector<Shape> outlines() const;
};

double evaluate_medium(const Medium& m, const Point& p);

/// Named media used by the experiments: "disc", "square", "pacman", "star", "four_squares",
/// "nonuniform_background", "constant".
Medium preset_medium(std::string_view name, double constant_value = 1.0);

// ---------------------------------------------------------------------------------------------

/// Pixel image mapped onto a rectangle. Row 0 is the top row of the image; pixel centers tile the
/// domain. Values are the raw grey levels.
struct RasterMedium {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;
  Rectangle domain = kUnitSquare;

  void validate() const;
  /// Nearest-pixel value at p (p clamped onto the domain).
  double value_at(const Point& p) const;
};

/// Parse a binary (P5) or ASCII (P2) greyscale PGM payload. Throws ParseError with the byte offset
/// of the first malformed token.
RasterMedium medium_from_raster(std::span<const std::uint8_t> bytes, const Rectangle& domain);
RasterMedium medium_from_raster_file(const std::string& path, const Rectangle& domain);

// ---------------------------------------------------------------------------------------------

/// Continuous piecewise-linear function given by its nodal values.
struct FeFunction {
  std::shared_ptr<const Mesh> mesh;
  Eigen::VectorXd coefficients;

  FeFunction() = default;
  FeFunction(std::shared_ptr<const Mesh> m, Eigen::VectorXd c);

  static FeFunction zeros(std::shared_ptr<const Mesh> m);
  static FeFunction constant(std::shared_ptr<const Mesh> m, double c);

  int size() const { return static_cast<int>(coefficients.size()); }
  double evaluate(const Point& p) const;
  /// Value at barycentric coordinates of triangle t.
  double evaluate(int t, const Eigen::Vector3d& lambda) const;
  Eigen::Vector2d gradient(int t) const;
};

/// Throws InputError unless both functions live on the same mesh object (or identical meshes).
void require_same_mesh(const FeFunction& a, const FeFunction& b, const char* where);

using PointFunction = std::function<double(const Point&)>;

PointFunction evaluator(const Medium& m);
PointFunction evaluator(const RasterMedium& m);

/// Nodal interpolant u_delta. The mesh must cover exactly the medium's domain.
FeFunction interpolate_to_mesh(const Medium& m, std::shared_ptr<const Mesh> mesh);
FeFunction interpolate_to_mesh(const RasterMedium& m, std::shared_ptr<const Mesh> mesh);

}  // namespace asd
