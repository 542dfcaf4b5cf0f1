#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "geometry.hpp"
#include "image.hpp"

namespace fgai {

/// Triangular mesh with per-corner texture coordinates and its gray texture.
/// Immutable once loaded; share it by const reference or shared_ptr<const>.
struct TexturedMesh {
  TriMesh geometry;
  /// corner_uv[f][i] is the (u, v) of corner i of facet f, in [0,1]^2.
  std::vector<std::array<Vec2, 3>> corner_uv;
  GrayImage texture;
  /// Zero-area facets removed during validation.
  std::size_t dropped_facets = 0;
};

struct MeshMetrics {
  double mean_edge_length = 0.0;
  std::size_t vertex_count = 0;
  std::size_t facet_count = 0;
};

/// Parses the OBJ subset used for scans: `v`, `vt` and `f` records with
/// v/vt or v/vt/vn corners. Polygons are fan-triangulated, normals, groups and
/// materials are ignored. `source_name` is used in error messages.
TexturedMesh parse_obj(std::istream& in, const std::string& source_name = "<obj>");

TexturedMesh load_textured_mesh(const std::filesystem::path& mesh_path,
                                const std::filesystem::path& texture_path);

/// Mean length over the set of unique undirected edges.
double mean_edge_length(const TriMesh& mesh);
MeshMetrics mesh_metrics(const TriMesh& mesh);

/// Texture coordinates -> continuous pixel coordinates (x = column, y = row)
/// in [0,width] x [0,height]. v = 0 is the bottom image row.
inline Vec2 uv_to_pixel(const Vec2& uv, int width, int height) {
  return {uv.x() * width, (1.0 - uv.y()) * height};
}

/// Writes geometry and texture coordinates as OBJ (debug dumps, fixtures).
void write_obj(const std::filesystem::path& path, const TriMesh& mesh,
               const std::vector<std::array<Vec2, 3>>* corner_uv = nullptr);

}  // namespace fgai
