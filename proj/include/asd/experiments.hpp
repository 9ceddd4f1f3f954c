#pragma once

#include "asd/fem.hpp"
#include "asd/field_io.hpp"
#include "asd/media.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace asd {

enum class EpsilonPolicy {
  absolute,  ///< eps used as given
  contrast   ///< eps multiplied by max(u_delta) - min(u_delta)
};

struct InversionSettings {
  double gamma = 1.0 / 32.0;
  double noise = 0.04;
  double tau_max = 1.1;
  int iter_max = 20;
};

struct ExperimentConfig {
  std::variant<Medium, RasterMedium> medium;
  std::string medium_label;
  double h0 = 0.05;
  std::vector<int> levels;  ///< mesh sizes h0 / 2^m
  std::vector<double> epsilons;
  WeightForm form = WeightForm::q_power;
  double q = 2.0;
  EpsilonPolicy epsilon_policy = EpsilonPolicy::absolute;
  int k = 1;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  bool export_matrices = false;
  InversionSettings inversion;

  const Rectangle& domain() const;
};

/// Parse the JSON config text. `base_dir` resolves relative raster paths. Throws ConfigError
/// carrying the JSON pointer of the offending field.
ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

/// Least-squares slope of log(y) against log(x). NaN with fewer than two usable points.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);
/// Number of leading points (in the given order) before the sequence stops decaying: point i+1
/// is kept while y[i+1] < 0.5 * y[i].
std::size_t pre_floor_count(const std::vector<double>& y);

/// Uniform mesh of the config's domain with spacing h0 / 2^level.
std::shared_ptr<const Mesh> mesh_for_level(const ExperimentConfig& config, int level);

/// Rows (delta, error_exact, error_interp) per level plus a final "slope" row. Errors are
/// ||u - Q_K u|| (quadrature) and ||u_delta - Q_K u_delta|| (mass matrix) at eps = epsilons[0].
CsvTable run_convergence_delta(const ExperimentConfig& config);
/// Rows (epsilon, error) with error ||u_delta - Q_K u_delta|| on the last listed level, plus a
/// "slope" row over the pre-floor range when more than one epsilon is given.
CsvTable run_convergence_eps(const ExperimentConfig& config);
/// AS decomposition on the last level with eps = epsilons[0]; writes eigenvalues.csv,
/// fields.csv and fields.vtk. Returns the eigenvalue table.
CsvTable run_decompose(const ExperimentConfig& config);
/// Deconvolution experiment; writes inversion.csv, fields.csv, fields.vtk. Returns the report table.
CsvTable run_invert(const ExperimentConfig& config);

}  // namespace asd
