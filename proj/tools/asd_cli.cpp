// Experiment driver: asd <convergence-delta|convergence-eps|decompose|invert> --config FILE [--out DIR]
//
// Exit codes: 0 success, 2 configuration/input error, 3 numerical failure.

#include "asd/errors.hpp"
#include "asd/experiments.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <map>

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive spectral decompositions of piecewise-constant media"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  using Driver = std::function<asd::CsvTable(const asd::ExperimentConfig&)>;
  const std::map<std::string, std::pair<std::string, Driver>> commands{
      {"convergence-delta", {"Error vs mesh size at fixed epsilon", asd::run_convergence_delta}},
      {"convergence-eps", {"Error vs epsilon at fixed mesh size", asd::run_convergence_eps}},
      {"decompose", {"Export phi0, phi_1..phi_K and eigenvalues", asd::run_decompose}},
      {"invert", {"Gaussian deconvolution: ASI vs TSVD vs LU", asd::run_invert}},
  };
  for (const auto& [name, entry] : commands) {
    auto* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (overrides out_dir)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  const auto* chosen = app.get_subcommands().front();
  try {
    asd::ExperimentConfig config = asd::load_config(config_path);
    if (!out_dir.empty()) config.out_dir = out_dir;
    const asd::CsvTable table = commands.at(chosen->get_name()).second(config);
    std::cout << table.to_string();
    return 0;
  } catch (const asd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const asd::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kConfigError;
  } catch (const asd::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kConfigError;
  } catch (const asd::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const asd::CapacityError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  }
}
