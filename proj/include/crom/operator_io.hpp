#pragma once

#include <string>
#include <vector>

#include "crom/assembly.hpp"
#include "crom/types.hpp"

namespace crom {

// Coordinate-format text with 1-based indices. A leading
// "%%MatrixMarket matrix coordinate real <general|symmetric>" banner is
// honored; '%' comment lines are skipped. Values are written with enough
// digits that doubles round-trip exactly.
SparseMatrix read_matrix_market(const std::string& path);
void write_matrix_market(const std::string& path, const SparseMatrix& m,
                         const std::string& comment = "");

// One decimal value per line; '%' comments and blank lines are skipped.
Vector read_vector_file(const std::string& path);
void write_vector_file(const std::string& path, const Vector& v);

// 0-based node indices, one per line, same comment rules as vectors.
std::vector<Index> read_index_file(const std::string& path);
void write_index_file(const std::string& path, const std::vector<Index>& indices);

struct OperatorPaths {
  std::string mass;
  std::string stiffness;
  std::string input;
  std::string output;
};

// Shape-checked load; symmetry of the mass matrix is verified within 1e-12
// relative and both matrices are symmetrized exactly afterwards (the time
// integrator and the dual solve rely on symmetric operators).
AssembledOperators load_operators(const OperatorPaths& paths);
void save_operators(const OperatorPaths& paths, const AssembledOperators& ops);

}  // namespace crom
