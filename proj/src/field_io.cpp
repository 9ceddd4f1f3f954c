#include "asd/field_io.hpp"

#include "asd/errors.hpp"

#include <Eigen/SparseCore>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace asd {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string CsvTable::to_string() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

void CsvTable::write(const std::string& path) const { write_text_file(path, to_string()); }

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open '" + path + "' for writing");
  f << contents;
  if (!f) throw InputError("failed writing '" + path + "'");
}

CsvTable fields_table(const Mesh& mesh, const std::vector<NamedField>& fields) {
  CsvTable t;
  t.header = {"x", "y"};
  for (const auto& f : fields) {
    if (f.values.size() != mesh.vertex_count()) throw InputError("fields_table: field '" + f.name + "' has wrong size");
    t.header.push_back(f.name);
  }
  const auto verts = mesh.vertices();
  t.rows.reserve(verts.size());
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    std::vector<std::string> row{format_number(verts[static_cast<std::size_t>(i)].x()),
                                 format_number(verts[static_cast<std::size_t>(i)].y())};
    for (const auto& f : fields) row.push_back(format_number(f.values[i]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string fields_vtk(const Mesh& mesh, const std::vector<NamedField>& fields, const std::string& title) {
  std::ostringstream out;
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.vertex_count() << " double\n";
  for (const auto& p : mesh.vertices()) out << format_number(p.x()) << ' ' << format_number(p.y()) << " 0\n";
  out << "CELLS " << mesh.triangle_count() << ' ' << 4 * mesh.triangle_count() << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << mesh.triangle_count() << '\n';
  for (int t = 0; t < mesh.triangle_count(); ++t) out << "5\n";
  if (!fields.empty()) out << "POINT_DATA " << mesh.vertex_count() << '\n';
  for (const auto& f : fields) {
    if (f.values.size() != mesh.vertex_count()) throw InputError("fields_vtk: field '" + f.name + "' has wrong size");
    out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
    for (Eigen::Index i = 0; i < f.values.size(); ++i) out << format_number(f.values[i]) << '\n';
  }
  return out.str();
}

std::string matrix_triplets(const Eigen::SparseMatrix<double, Eigen::RowMajor, int>& m) {
  std::ostringstream out;
  for (int i = 0; i < m.outerSize(); ++i)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor, int>::InnerIterator it(m, i); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << format_number(it.value()) << '\n';
  return out.str();
}

}  // namespace asd
