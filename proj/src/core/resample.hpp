#pragma once

#include <optional>

#include "geometry.hpp"
#include "mesh_io.hpp"

namespace fgai {

/// Centroid plus covariance eigenvectors, eigenvalues descending. e1, e2 span
/// the main plane, e3 points to the viewer side (mean vertex normal), and the
/// frame is right-handed.
struct PrincipalFrame {
  Vec3 origin = Vec3::Zero();
  std::array<Vec3, 3> axes{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  Vec3 eigenvalues = Vec3::Zero();

  Vec3 to_local(const Vec3& p) const {
    const Vec3 d = p - origin;
    return {d.dot(axes[0]), d.dot(axes[1]), d.dot(axes[2])};
  }
  Vec3 to_world(const Vec3& local) const {
    return origin + local.x() * axes[0] + local.y() * axes[1] + local.z() * axes[2];
  }
};

PrincipalFrame principal_frame(const TriMesh& mesh);

enum class SpacingRule {
  /// h = sqrt(step * projected_area / vertex_count): the node density is the
  /// original projected vertex density divided by `step`.
  DensityMatched,
  /// h = sqrt(step) * mean edge length.
  EdgeLength,
};

struct ResampleConfig {
  double step = 1.0;  ///< sub-sampling step k >= 1; vertex counts shrink by ~k
  SpacingRule spacing_rule = SpacingRule::DensityMatched;
};

/// Regular-grid resampling of the depth function z = f(x, y) in the principal
/// frame, triangulated by 2D Delaunay over the covered grid nodes.
struct ResampledMesh {
  TriMesh mesh;
  /// Nearest original vertex (3D Euclidean) of every resampled vertex.
  std::vector<std::uint32_t> correspondence;

  PrincipalFrame frame;
  double spacing = 0.0;
  /// Node (i, j) sits at local (u, v) = ((i0 + i) h, (j0 + j) h).
  std::int64_t i0 = 0, j0 = 0;
  int cols = 0, rows = 0;
  /// Row-major per-node coverage flag (rows x cols).
  std::vector<std::uint8_t> coverage;
  /// Lattice coordinates (i0 + i, j0 + j) of every resampled vertex.
  std::vector<std::array<std::int64_t, 2>> lattice;
};

/// Grid spacing the resampler uses for `step`.
double grid_spacing(const TriMesh& mesh, const PrincipalFrame& frame, const ResampleConfig& cfg);

ResampledMesh resample(const TexturedMesh& mesh, const PrincipalFrame& frame, const ResampleConfig& cfg);

/// Texture transform of the resampled mesh: pixel coordinates (x = column,
/// y = row, continuous, in [0,width] x [0,height]) into the original texture.
struct TextureMap {
  int texture_width = 0;
  int texture_height = 0;
  std::vector<Vec2> vertex_pixels;
  std::vector<std::array<Vec2, 3>> facet_pixels;

  bool empty() const { return facet_pixels.empty(); }
};

/// Per original vertex, the uv it carries in the lowest-index facet using it
/// (nullopt for vertices no facet references).
std::vector<std::optional<Vec2>> vertex_uv(const TexturedMesh& mesh);

TextureMap rebuild_texture_map(const ResampledMesh& resampled, const TexturedMesh& original);

}  // namespace fgai
