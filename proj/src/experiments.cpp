#include "asd/experiments.hpp"

#include "asd/errors.hpp"
#include "asd/inversion.hpp"
#include "asd/quadrature.hpp"
#include "asd/spectral.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace asd {
namespace {

using nlohmann::json;

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path + "/" + key, "missing required field");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<int>();
}

std::string string_value(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

Point point(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) throw ConfigError(path, "expected [x, y]");
  return {number(v[0], path + "/0"), number(v[1], path + "/1")};
}

Rectangle rectangle(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 4) throw ConfigError(path, "expected [xmin, ymin, xmax, ymax]");
  Rectangle r{number(v[0], path + "/0"), number(v[1], path + "/1"), number(v[2], path + "/2"), number(v[3], path + "/3")};
  if (!r.valid()) throw ConfigError(path, "rectangle has no area");
  return r;
}

Shape shape(const json& v, const std::string& path) {
  const std::string type = string_value(require(v, "type", path), path + "/type");
  constexpr double deg = std::numbers::pi / 180.0;
  Shape s;
  if (type == "disc") {
    s = Disc{point(require(v, "center", path), path + "/center"), number(require(v, "radius", path), path + "/radius")};
  } else if (type == "rectangle") {
    s = Box{point(require(v, "min", path), path + "/min"), point(require(v, "max", path), path + "/max")};
  } else if (type == "polygon") {
    const json& verts = require(v, "vertices", path);
    if (!verts.is_array()) throw ConfigError(path + "/vertices", "expected an array of points");
    Polygon poly;
    for (std::size_t i = 0; i < verts.size(); ++i) poly.vertices.push_back(point(verts[i], path + "/vertices/" + std::to_string(i)));
    s = std::move(poly);
  } else if (type == "sector_complement") {
    s = SectorComplement{point(require(v, "center", path), path + "/center"),
                         number(require(v, "radius", path), path + "/radius"),
                         deg * number(require(v, "angle_start_deg", path), path + "/angle_start_deg"),
                         deg * number(require(v, "angle_end_deg", path), path + "/angle_end_deg")};
  } else if (type == "star") {
    s = Star{point(require(v, "center", path), path + "/center"), integer(require(v, "points", path), path + "/points"),
             number(require(v, "r_outer", path), path + "/r_outer"), number(require(v, "r_inner", path), path + "/r_inner")};
  } else {
    throw ConfigError(path + "/type", "unknown shape type '" + type + "'");
  }
  try {
    validate_shape(s);
  } catch (const InputError& e) {
    throw ConfigError(path, e.what());
  }
  return s;
}

void parse_medium(const json& v, const std::string& path, const std::string& base_dir, ExperimentConfig& config) {
  if (!v.is_object()) throw ConfigError(path, "expected an object");
  if (v.contains("preset")) {
    const std::string name = string_value(v["preset"], path + "/preset");
    const double value = v.contains("value") ? number(v["value"], path + "/value") : 1.0;
    try {
      config.medium = preset_medium(name, value);
    } catch (const InputError& e) {
      throw ConfigError(path + "/preset", e.what());
    }
    config.medium_label = name;
    return;
  }
  const Rectangle domain = v.contains("domain") ? rectangle(v["domain"], path + "/domain") : kUnitSquare;
  if (v.contains("raster")) {
    std::filesystem::path file = string_value(v["raster"], path + "/raster");
    if (file.is_relative()) file = std::filesystem::path(base_dir) / file;
    try {
      config.medium = medium_from_raster_file(file.string(), domain);
    } catch (const InputError& e) {
      throw ConfigError(path + "/raster", e.what());
    } catch (const ParseError& e) {
      throw ConfigError(path + "/raster", e.what());
    }
    config.medium_label = file.filename().string();
    return;
  }
  Medium m;
  m.domain = domain;
  if (v.contains("mode")) {
    const std::string mode = string_value(v["mode"], path + "/mode");
    if (mode == "replace") m.mode = InclusionMode::replace;
    else if (mode == "additive") m.mode = InclusionMode::additive;
    else throw ConfigError(path + "/mode", "expected \"replace\" or \"additive\"");
  }
  if (v.contains("background")) {
    const json& bg = v["background"];
    if (!bg.is_array()) throw ConfigError(path + "/background", "expected an array");
    for (std::size_t i = 0; i < bg.size(); ++i) {
      const std::string p = path + "/background/" + std::to_string(i);
      BackgroundPiece piece;
      piece.value = number(require(bg[i], "value", p), p + "/value");
      if (bg[i].contains("shape")) piece.shape = shape(bg[i]["shape"], p + "/shape");
      m.background.push_back(std::move(piece));
    }
  }
  if (v.contains("inclusions")) {
    const json& inc = v["inclusions"];
    if (!inc.is_array()) throw ConfigError(path + "/inclusions", "expected an array");
    for (std::size_t i = 0; i < inc.size(); ++i) {
      const std::string p = path + "/inclusions/" + std::to_string(i);
      Inclusion in{shape(require(inc[i], "shape", p), p + "/shape"), number(require(inc[i], "value", p), p + "/value")};
      if (in.value == 0.0) throw ConfigError(p + "/value", "inclusion values must be nonzero");
      m.inclusions.push_back(std::move(in));
    }
  }
  config.medium = std::move(m);
  config.medium_label = "custom";
}

FeFunction interpolate(const ExperimentConfig& config, std::shared_ptr<const Mesh> mesh) {
  return std::visit([&](const auto& m) { return interpolate_to_mesh(m, std::move(mesh)); }, config.medium);
}

PointFunction exact_field(const ExperimentConfig& config) {
  return std::visit([](const auto& m) { return evaluator(m); }, config.medium);
}

WeightSpec weight_for(const ExperimentConfig& config, double epsilon, const FeFunction& u_delta) {
  WeightSpec spec{config.form, config.q, epsilon};
  if (config.epsilon_policy == EpsilonPolicy::contrast) {
    const double range = u_delta.coefficients.maxCoeff() - u_delta.coefficients.minCoeff();
    if (range > 0.0) spec.epsilon *= range;
  }
  return spec;
}

std::string slope_cell(double s) { return std::isnan(s) ? std::string() : format_number(s); }

void ensure_out_dir(const ExperimentConfig& config) { std::filesystem::create_directories(config.out_dir); }

std::string out_path(const ExperimentConfig& config, const std::string& name) {
  return (std::filesystem::path(config.out_dir) / name).string();
}

}  // namespace

const Rectangle& ExperimentConfig::domain() const {
  return std::visit([](const auto& m) -> const Rectangle& { return m.domain; }, medium);
}

ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what(), e.byte);
  }
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");

  ExperimentConfig c;
  parse_medium(require(doc, "medium", ""), "/medium", base_dir, c);

  const json& mesh = require(doc, "mesh", "");
  c.h0 = number(require(mesh, "h0", "/mesh"), "/mesh/h0");
  if (!(c.h0 > 0.0)) throw ConfigError("/mesh/h0", "must be positive");
  const json& levels = require(mesh, "levels", "/mesh");
  if (!levels.is_array() || levels.empty()) throw ConfigError("/mesh/levels", "expected a non-empty array");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const int m = integer(levels[i], "/mesh/levels/" + std::to_string(i));
    if (m < 0 || m > 12) throw ConfigError("/mesh/levels/" + std::to_string(i), "level must be in 0..12");
    c.levels.push_back(m);
  }

  const json& eps = require(doc, "epsilons", "");
  if (!eps.is_array() || eps.empty()) throw ConfigError("/epsilons", "expected a non-empty array");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double e = number(eps[i], "/epsilons/" + std::to_string(i));
    if (!(e > 0.0)) throw ConfigError("/epsilons/" + std::to_string(i), "epsilon must be positive");
    c.epsilons.push_back(e);
  }

  if (doc.contains("weight")) {
    const json& w = doc["weight"];
    if (w.contains("form")) {
      const std::string form = string_value(w["form"], "/weight/form");
      if (form == "q_power") c.form = WeightForm::q_power;
      else if (form == "max") c.form = WeightForm::max;
      else throw ConfigError("/weight/form", "expected \"q_power\" or \"max\"");
    }
    if (w.contains("q")) {
      c.q = number(w["q"], "/weight/q");
      if (!(c.q >= 1.0)) throw ConfigError("/weight/q", "q must be >= 1");
    }
    if (w.contains("epsilon_policy")) {
      const std::string p = string_value(w["epsilon_policy"], "/weight/epsilon_policy");
      if (p == "absolute") c.epsilon_policy = EpsilonPolicy::absolute;
      else if (p == "contrast") c.epsilon_policy = EpsilonPolicy::contrast;
      else throw ConfigError("/weight/epsilon_policy", "expected \"absolute\" or \"contrast\"");
    }
  }

  c.k = integer(require(doc, "K", ""), "/K");
  if (c.k < 0) throw ConfigError("/K", "K must be non-negative");
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw ConfigError("/seed", "expected a non-negative integer");
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("out_dir")) c.out_dir = string_value(doc["out_dir"], "/out_dir");
  if (doc.contains("export_matrices")) {
    if (!doc["export_matrices"].is_boolean()) throw ConfigError("/export_matrices", "expected a boolean");
    c.export_matrices = doc["export_matrices"].get<bool>();
  }
  if (doc.contains("inversion")) {
    const json& inv = doc["inversion"];
    if (!inv.is_object()) throw ConfigError("/inversion", "expected an object");
    if (inv.contains("gamma")) c.inversion.gamma = number(inv["gamma"], "/inversion/gamma");
    if (inv.contains("noise")) c.inversion.noise = number(inv["noise"], "/inversion/noise");
    if (inv.contains("tau_max")) c.inversion.tau_max = number(inv["tau_max"], "/inversion/tau_max");
    if (inv.contains("iter_max")) c.inversion.iter_max = integer(inv["iter_max"], "/inversion/iter_max");
    if (!(c.inversion.gamma > 0.0)) throw ConfigError("/inversion/gamma", "must be positive");
    if (!(c.inversion.noise >= 0.0)) throw ConfigError("/inversion/noise", "must be non-negative");
    if (!(c.inversion.tau_max >= 1.0)) throw ConfigError("/inversion/tau_max", "must be >= 1");
    if (c.inversion.iter_max < 1) throw ConfigError("/inversion/iter_max", "must be >= 1");
  }

  for (int m : c.levels) {
    const double h = c.h0 / std::ldexp(1.0, m);
    const Rectangle& d = c.domain();
    for (double extent : {d.width(), d.height()}) {
      const double cells = extent / h;
      if (std::abs(cells - std::round(cells)) > 1e-6 * cells)
        throw ConfigError("/mesh/h0", "domain extent is not a multiple of the mesh size at level " + std::to_string(m));
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("", "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  const auto base = std::filesystem::path(path).parent_path();
  return parse_config(ss.str(), base.empty() ? std::string(".") : base.string());
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  const double denom = n * sxx - sx * sx;
  if (n < 2 || denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / denom;
}

std::size_t pre_floor_count(const std::vector<double>& y) {
  if (y.empty()) return 0;
  std::size_t n = 1;
  while (n < y.size() && y[n] < 0.5 * y[n - 1]) ++n;
  return n;
}

std::shared_ptr<const Mesh> mesh_for_level(const ExperimentConfig& config, int level) {
  const double h = config.h0 / std::ldexp(1.0, level);
  const Rectangle& d = config.domain();
  const int nx = static_cast<int>(std::lround(d.width() / h));
  const int ny = static_cast<int>(std::lround(d.height() / h));
  return std::make_shared<const Mesh>(d, nx, ny);
}

CsvTable run_convergence_delta(const ExperimentConfig& config) {
  CsvTable table;
  table.header = {"delta", "error_exact", "error_interp"};
  std::vector<double> deltas, exact_errors, interp_errors;
  const PointFunction u = exact_field(config);
  for (int level : config.levels) {
    const auto mesh = mesh_for_level(config, level);
    const FeFunction u_delta = interpolate(config, mesh);
    const SpectralBasis basis = build_as_basis(u_delta, weight_for(config, config.epsilons.front(), u_delta), config.k);
    const SampledField samples(mesh, u);
    const double e_exact = samples.l2_distance(affine_projection(basis, samples));
    const double e_interp = l2_error_fe(u_delta, affine_projection(basis, u_delta));
    deltas.push_back(mesh->h());
    exact_errors.push_back(e_exact);
    interp_errors.push_back(e_interp);
    table.rows.push_back({format_number(mesh->h()), format_number(e_exact), format_number(e_interp)});
  }
  if (deltas.size() > 1)
    table.rows.push_back({"slope", slope_cell(loglog_slope(deltas, exact_errors)), slope_cell(loglog_slope(deltas, interp_errors))});
  ensure_out_dir(config);
  table.write(out_path(config, "convergence_delta.csv"));
  return table;
}

CsvTable run_convergence_eps(const ExperimentConfig& config) {
  CsvTable table;
  table.header = {"epsilon", "error"};
  const auto mesh = mesh_for_level(config, config.levels.back());
  const FeFunction u_delta = interpolate(config, mesh);
  std::vector<double> errors;
  for (double eps : config.epsilons) {
    const SpectralBasis basis = build_as_basis(u_delta, weight_for(config, eps, u_delta), config.k);
    const double e = l2_error_fe(u_delta, affine_projection(basis, u_delta));
    errors.push_back(e);
    table.rows.push_back({format_number(eps), format_number(e)});
  }
  if (config.epsilons.size() > 1) {
    const std::size_t n = pre_floor_count(errors);
    const std::vector<double> x(config.epsilons.begin(), config.epsilons.begin() + static_cast<std::ptrdiff_t>(n));
    const std::vector<double> y(errors.begin(), errors.begin() + static_cast<std::ptrdiff_t>(n));
    table.rows.push_back({"slope", slope_cell(loglog_slope(x, y))});
  }
  ensure_out_dir(config);
  table.write(out_path(config, "convergence_eps.csv"));
  return table;
}

CsvTable run_decompose(const ExperimentConfig& config) {
  const auto mesh = mesh_for_level(config, config.levels.back());
  const FeFunction u_delta = interpolate(config, mesh);
  const WeightSpec spec = weight_for(config, config.epsilons.front(), u_delta);
  const SpectralBasis basis = build_as_basis(u_delta, spec, config.k);

  CsvTable table;
  table.header = {"k", "lambda", "residual"};
  for (int k = 0; k < basis.size(); ++k)
    table.rows.push_back({std::to_string(k + 1), format_number(basis.eigenvalues[k]), format_number(basis.residuals[k])});

  std::vector<NamedField> fields{{"u_delta", u_delta.coefficients}, {"phi0", basis.phi0.coefficients}};
  for (int k = 0; k < basis.size(); ++k) fields.push_back({"phi" + std::to_string(k + 1), basis.modes.col(k)});

  ensure_out_dir(config);
  table.write(out_path(config, "eigenvalues.csv"));
  fields_table(*mesh, fields).write(out_path(config, "fields.csv"));
  write_text_file(out_path(config, "fields.vtk"), fields_vtk(*mesh, fields, "AS decomposition"));
  if (config.export_matrices) {
    write_text_file(out_path(config, "stiffness.txt"), matrix_triplets(assemble_stiffness(*mesh, u_delta, spec).storage()));
    write_text_file(out_path(config, "mass.txt"), matrix_triplets(assemble_mass(*mesh).storage()));
  }
  return table;
}

CsvTable run_invert(const ExperimentConfig& config) {
  if (!(config.inversion.noise > 0.0)) throw ConfigError("/inversion/noise", "noise level must be positive for inversion");
  const auto mesh = mesh_for_level(config, config.levels.back());
  const FeFunction truth = interpolate(config, mesh);
  const ConvolutionOperator op = build_convolution(mesh, config.inversion.gamma);
  const FeFunction clean = op.apply(truth);
  const NoisyObservation obs = add_noise(clean, config.inversion.noise, config.seed);

  AsiOptions options;
  options.weight = weight_for(config, config.epsilons.front(), truth);
  options.k = std::max(config.k, 1);
  options.tau_max = config.inversion.tau_max;
  options.iter_max = config.inversion.iter_max;

  const InversionReport asi = asi_solve(op, obs.data, obs.eta, truth, options);
  const InversionReport tsvd = tsvd_solve(op, obs.data, obs.eta, truth);
  const InversionReport lu = direct_solve(op, obs.data, obs.eta, truth);

  CsvTable table;
  table.header = {"method", "e_r", "tau", "iterations"};
  for (const InversionReport* r : {&asi, &tsvd, &lu})
    table.rows.push_back({r->method, format_number(r->relative_error), format_number(r->tau), std::to_string(r->iterations)});

  const std::vector<NamedField> fields{{"truth", truth.coefficients},
                                       {"observed", obs.data.coefficients},
                                       {"asi", asi.reconstruction.coefficients},
                                       {"tsvd", tsvd.reconstruction.coefficients},
                                       {"lu", lu.reconstruction.coefficients}};
  ensure_out_dir(config);
  table.write(out_path(config, "inversion.csv"));
  fields_table(*mesh, fields).write(out_path(config, "fields.csv"));
  write_text_file(out_path(config, "fields.vtk"), fields_vtk(*mesh, fields, "deconvolution"));
  return table;
}

}  // namespace asd
