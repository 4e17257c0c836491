#include "crom/mesh.hpp"

#include <set>
#include <stdexcept>
#include <string>

#include "crom/errors.hpp"

namespace crom {

const std::vector<Index>& Mesh::node_set(const std::string& name) const {
  const auto it = node_sets.find(name);
  if (it == node_sets.end()) {
    throw std::invalid_argument("mesh has no node set named '" + name + "'");
  }
  return it->second;
}

void Mesh::validate() const {
  const Index n = node_count();
  for (std::size_t e = 0; e < element_connectivity.size(); ++e) {
    const auto& conn = element_connectivity[e];
    std::set<Index> distinct;
    for (const Index node : conn) {
      if (node < 0 || node >= n) {
        throw ValidationError("element " + std::to_string(e) +
                              " references node " + std::to_string(node) +
                              " outside [0, " + std::to_string(n) + ")");
      }
      distinct.insert(node);
    }
    if (distinct.size() != conn.size()) {
      throw ValidationError("element " + std::to_string(e) + " has repeated nodes");
    }
  }
  for (const auto& [name, nodes] : node_sets) {
    for (const Index node : nodes) {
      if (node < 0 || node >= n) {
        throw ValidationError("node set '" + name + "' references node " +
                              std::to_string(node) + " outside the mesh");
      }
    }
  }
}

Mesh build_block_mesh(Index nx, Index ny, Index nz, const std::array<double, 3>& lengths) {
  if (nx < 1 || ny < 1 || nz < 1) {
    throw std::invalid_argument("element counts must be at least 1");
  }
  for (const double len : lengths) {
    if (!(len > 0.0)) {
      throw std::invalid_argument("block extents must be positive");
    }
  }

  Mesh mesh;
  const Index mx = nx + 1;
  const Index my = ny + 1;
  const Index mz = nz + 1;
  mesh.node_coordinates.reserve(static_cast<std::size_t>(mx * my * mz));

  const double hx = lengths[0] / static_cast<double>(nx);
  const double hy = lengths[1] / static_cast<double>(ny);
  const double hz = lengths[2] / static_cast<double>(nz);

  // Node index layout: x fastest, then y, then z.
  for (Index k = 0; k < mz; ++k) {
    for (Index j = 0; j < my; ++j) {
      for (Index i = 0; i < mx; ++i) {
        mesh.node_coordinates.push_back(
            {static_cast<double>(i) * hx, static_cast<double>(j) * hy,
             static_cast<double>(k) * hz});
      }
    }
  }

  const auto node_id = [mx, my](Index i, Index j, Index k) {
    return i + mx * (j + my * k);
  };

  mesh.element_connectivity.reserve(static_cast<std::size_t>(nx * ny * nz));
  for (Index k = 0; k < nz; ++k) {
    for (Index j = 0; j < ny; ++j) {
      for (Index i = 0; i < nx; ++i) {
        // Corner order matches the reference hexahedron used in assembly:
        // (-,-,-),(+,-,-),(+,+,-),(-,+,-),(-,-,+),(+,-,+),(+,+,+),(-,+,+).
        mesh.element_connectivity.push_back(
            {node_id(i, j, k), node_id(i + 1, j, k), node_id(i + 1, j + 1, k),
             node_id(i, j + 1, k), node_id(i, j, k + 1), node_id(i + 1, j, k + 1),
             node_id(i + 1, j + 1, k + 1), node_id(i, j + 1, k + 1)});
      }
    }
  }

  std::vector<Index> left_edge;
  std::vector<Index> right_edge;
  std::vector<Index> s2_region;
  const double half_x = 0.5 * lengths[0] * (1.0 + 1e-12);
  const double half_y = 0.5 * lengths[1] * (1.0 + 1e-12);
  const double right_x = lengths[0] * (1.0 - 1e-12);
  for (Index id = 0; id < mesh.node_count(); ++id) {
    const auto& p = mesh.node_coordinates[static_cast<std::size_t>(id)];
    if (p[0] == 0.0) left_edge.push_back(id);
    if (p[0] >= right_x) right_edge.push_back(id);
    if (p[0] <= half_x && p[1] <= half_y) s2_region.push_back(id);
  }
  mesh.node_sets["left_edge"] = std::move(left_edge);
  mesh.node_sets["right_edge"] = std::move(right_edge);
  mesh.node_sets["s2_region"] = std::move(s2_region);
  return mesh;
}

}  // namespace crom
