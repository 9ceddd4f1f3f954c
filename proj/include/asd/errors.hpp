#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace asd {

/// Invalid arguments: bad geometry, out-of-range indices, mismatched meshes.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed external payload (image files, config documents).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Config document is structurally valid JSON but a field is wrong. `path` is the JSON pointer.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Base for failures of a numerical method on otherwise valid input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best_residuals)
      : NumericalError(what), best_residuals_(std::move(best_residuals)) {}

  const std::vector<double>& best_residuals() const noexcept { return best_residuals_; }

 private:
  std::vector<double> best_residuals_;
};

class DegenerateBasisError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SolveError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Dense storage would exceed the configured size guard.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace asd
