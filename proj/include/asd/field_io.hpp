#pragma once

#include "asd/media.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <string>
#include <vector>

namespace asd {

/// Shortest round-trip decimal form (17 significant digits).
std::string format_number(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_string() const;
  void write(const std::string& path) const;
};

struct NamedField {
  std::string name;
  Eigen::VectorXd values;  ///< one value per vertex
};

/// CSV with columns x, y, then one column per field.
CsvTable fields_table(const Mesh& mesh, const std::vector<NamedField>& fields);

/// Legacy VTK (ASCII, UNSTRUCTURED_GRID of triangles) with one POINT_DATA scalar per field.
std::string fields_vtk(const Mesh& mesh, const std::vector<NamedField>& fields, const std::string& title = "asd fields");
void write_text_file(const std::string& path, const std::string& contents);

/// Triplet text dump "i j value" (0-based), one nonzero per line.
std::string matrix_triplets(const Eigen::SparseMatrix<double, Eigen::RowMajor, int>& m);

}  // namespace asd
