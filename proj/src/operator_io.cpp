#include "crom/operator_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "crom/errors.hpp"

namespace crom {

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open file '" + path + "'");
  }
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open file '" + path + "' for writing");
  }
  out.precision(17);
  return out;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char ch) { return std::isspace(ch); });
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

}  // namespace

SparseMatrix read_matrix_market(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  bool symmetric = false;
  bool banner_seen = false;

  // Header and comments.
  while (std::getline(in, line)) {
    if (line.empty() || is_blank(line)) continue;
    if (line[0] == '%') {
      if (!banner_seen && line.rfind("%%MatrixMarket", 0) == 0) {
        banner_seen = true;
        std::istringstream banner(lower(line.substr(2)));
        std::string tag, object, format, field, sym;
        banner >> tag >> object >> format >> field >> sym;
        if (object != "matrix" || format != "coordinate" || field != "real") {
          throw ValidationError("unsupported MatrixMarket banner in '" + path +
                                "': " + line);
        }
        if (sym == "symmetric") {
          symmetric = true;
        } else if (!sym.empty() && sym != "general") {
          throw ValidationError("unsupported MatrixMarket symmetry '" + sym +
                                "' in '" + path + "'");
        }
      }
      continue;
    }
    break;
  }
  if (!in && line.empty()) {
    throw ValidationError("file '" + path + "' has no size line");
  }

  Index rows = 0, cols = 0;
  long long entries = 0;
  {
    std::istringstream sizes(line);
    if (!(sizes >> rows >> cols >> entries) || rows < 0 || cols < 0 || entries < 0) {
      throw ValidationError("malformed size line in '" + path + "': " + line);
    }
  }

  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(symmetric ? 2 * entries : entries));
  long long seen = 0;
  while (seen < entries && std::getline(in, line)) {
    if (line.empty() || is_blank(line) || line[0] == '%') continue;
    std::istringstream entry(line);
    Index i = 0, j = 0;
    double v = 0.0;
    if (!(entry >> i >> j >> v)) {
      throw ValidationError("malformed entry in '" + path + "': " + line);
    }
    if (i < 1 || i > rows || j < 1 || j > cols) {
      throw ValidationError("entry index (" + std::to_string(i) + ", " +
                            std::to_string(j) + ") out of bounds in '" + path + "'");
    }
    triplets.emplace_back(i - 1, j - 1, v);
    if (symmetric && i != j) triplets.emplace_back(j - 1, i - 1, v);
    ++seen;
  }
  if (seen < entries) {
    throw ValidationError("file '" + path + "' declares " + std::to_string(entries) +
                          " entries but contains " + std::to_string(seen));
  }

  SparseMatrix m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

void write_matrix_market(const std::string& path, const SparseMatrix& m,
                         const std::string& comment) {
  std::ofstream out = open_output(path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  if (!comment.empty()) out << "% " << comment << "\n";
  SparseMatrix compressed = m;
  compressed.makeCompressed();
  out << compressed.rows() << " " << compressed.cols() << " "
      << compressed.nonZeros() << "\n";
  for (Index col = 0; col < compressed.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(compressed, col); it; ++it) {
      out << (it.row() + 1) << " " << (it.col() + 1) << " " << it.value() << "\n";
    }
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

Vector read_vector_file(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || is_blank(line) || line[0] == '%') continue;
    std::istringstream entry(line);
    double v = 0.0;
    if (!(entry >> v)) {
      throw ValidationError("malformed value in '" + path + "': " + line);
    }
    values.push_back(v);
  }
  Vector out(static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) out[static_cast<Index>(i)] = values[i];
  return out;
}

void write_vector_file(const std::string& path, const Vector& v) {
  std::ofstream out = open_output(path);
  for (Index i = 0; i < v.size(); ++i) out << v[i] << "\n";
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<Index> read_index_file(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<Index> indices;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || is_blank(line) || line[0] == '%') continue;
    std::istringstream entry(line);
    long long v = 0;
    if (!(entry >> v) || v < 0) {
      throw ValidationError("malformed index in '" + path + "': " + line);
    }
    indices.push_back(static_cast<Index>(v));
  }
  return indices;
}

void write_index_file(const std::string& path, const std::vector<Index>& indices) {
  std::ofstream out = open_output(path);
  for (const Index i : indices) out << i << "\n";
  if (!out) throw IoError("failed writing '" + path + "'");
}

AssembledOperators load_operators(const OperatorPaths& paths) {
  AssembledOperators ops;
  ops.mass = read_matrix_market(paths.mass);
  ops.stiffness = read_matrix_market(paths.stiffness);
  ops.input = read_vector_file(paths.input);
  ops.output = read_vector_file(paths.output);

  if (ops.mass.rows() != ops.mass.cols()) {
    throw DimensionError("mass matrix in '" + paths.mass + "' is not square");
  }
  ops.dimension = ops.mass.rows();
  ops.validate();

  // Exact symmetrization so downstream Cholesky-type factorizations, which
  // read one triangle, see the matrix the validation accepted.
  ops.mass = 0.5 * (SparseMatrix(ops.mass.transpose()) + ops.mass);
  ops.stiffness = 0.5 * (SparseMatrix(ops.stiffness.transpose()) + ops.stiffness);
  return ops;
}

void save_operators(const OperatorPaths& paths, const AssembledOperators& ops) {
  write_matrix_market(paths.mass, ops.mass, "mass matrix");
  write_matrix_market(paths.stiffness, ops.stiffness,
                      "stiffness matrix, sign convention dx/dt = S x + ...");
  write_vector_file(paths.input, ops.input);
  write_vector_file(paths.output, ops.output);
}

}  // namespace crom
