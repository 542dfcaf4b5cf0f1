#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <array>
#include <cstdint>
#include <vector>

namespace fgai {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Facet = std::array<std::uint32_t, 3>;

/// Indexed triangle soup. Orientation follows facet winding (counter-clockwise
/// seen from the side the facet normal points to).
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Facet> facets;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t facet_count() const { return facets.size(); }
};

inline Vec3 facet_cross(const TriMesh& mesh, const Facet& f) {
  const Vec3& a = mesh.vertices[f[0]];
  return (mesh.vertices[f[1]] - a).cross(mesh.vertices[f[2]] - a);
}

/// Area-weighted vertex normals (unit length; zero for unreferenced vertices).
std::vector<Vec3> vertex_normals(const TriMesh& mesh);

/// Undirected edge adjacency with edge lengths, sorted by neighbour index.
struct EdgeGraph {
  struct Arc {
    std::uint32_t to;
    double length;
  };
  std::vector<std::vector<Arc>> adjacency;
};

EdgeGraph build_edge_graph(const TriMesh& mesh);

/// Unique undirected edges (i < j), sorted.
std::vector<std::array<std::uint32_t, 2>> unique_edges(const TriMesh& mesh);

}  // namespace fgai
