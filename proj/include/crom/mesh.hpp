#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "crom/types.hpp"

namespace crom {

// Structured 3-D hexahedral mesh with named node sets.
struct Mesh {
  std::vector<std::array<double, 3>> node_coordinates;  // [mm]
  std::vector<std::array<Index, 8>> element_connectivity;
  std::map<std::string, std::vector<Index>> node_sets;

  Index node_count() const { return static_cast<Index>(node_coordinates.size()); }
  Index element_count() const { return static_cast<Index>(element_connectivity.size()); }

  bool has_node_set(const std::string& name) const { return node_sets.count(name) > 0; }
  const std::vector<Index>& node_set(const std::string& name) const;

  // Checks connectivity bounds, distinct element nodes and node-set indices.
  void validate() const;
};

// Regular brick grid over [0,lx]x[0,ly]x[0,lz] with nx*ny*nz trilinear
// hexahedra. Ships two node sets: "left_edge" (the x = 0 face) and
// "s2_region" (lower-left quadrant of the x-y plane, all z).
Mesh build_block_mesh(Index nx, Index ny, Index nz, const std::array<double, 3>& lengths);

}  // namespace crom
