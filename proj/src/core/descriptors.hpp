#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "geometry.hpp"

namespace fgai {

struct PrincipalFrame;

/// Per-vertex descriptor kinds, in canonical channel order.
enum class DescriptorKind { K = 0, H = 1, GL = 2, LD = 3, SI = 4 };

inline constexpr std::array<DescriptorKind, 5> kAllKinds{DescriptorKind::K, DescriptorKind::H, DescriptorKind::GL,
                                                         DescriptorKind::LD, DescriptorKind::SI};

std::string_view kind_name(DescriptorKind kind);
std::optional<DescriptorKind> parse_kind(std::string_view name);

struct NeighborhoodSpec {
  double radius_multiplier = 3.0;  ///< radius = multiplier * mean edge length
};

/// First (E, F, G) and second (L, M, N) fundamental form coefficients.
struct FundamentalForms {
  double E = 1, F = 0, G = 1;
  double L = 0, M = 0, N = 0;
};

struct PrincipalCurvatures {
  double max = 0;  ///< lambda1
  double min = 0;  ///< lambda2 <= lambda1
};

struct CurvatureDescriptors {
  double K = 0;
  double H = 0;
  double SI = 0.5;
};

struct DescriptorField {
  DescriptorKind kind = DescriptorKind::K;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;

  std::size_t valid_count() const;
};

/// Edge graph, oriented vertex normals and mean edge length of one mesh.
/// Queries are const and may run concurrently.
class SurfaceIndex {
 public:
  /// Normals follow facet winding; they are flipped globally when their mean
  /// opposes the viewer axis (e3) of `frame`.
  explicit SurfaceIndex(const TriMesh& mesh, const PrincipalFrame* frame = nullptr);

  const TriMesh& mesh() const { return *mesh_; }
  const std::vector<Vec3>& normals() const { return normals_; }
  double mean_edge_length() const { return mean_edge_; }
  const EdgeGraph& graph() const { return graph_; }

  /// Vertices within graph-geodesic distance `radius` of `seed` (Dijkstra over
  /// edge lengths), seed included, sorted ascending. Throws DegenerateGeometry
  /// for an isolated seed.
  std::vector<std::uint32_t> neighborhood(std::uint32_t seed, double radius) const;

 private:
  const TriMesh* mesh_;
  EdgeGraph graph_;
  std::vector<Vec3> normals_;
  double mean_edge_ = 0;
};

std::vector<std::uint32_t> neighborhood(const TriMesh& mesh, std::uint32_t vertex, const NeighborhoodSpec& spec);

/// Least-squares quadric z = a x^2 + b xy + c y^2 + d x + f y + g over the
/// neighbourhood in the vertex's tangent frame; the height axis is the
/// negated normal so surfaces bulging toward the viewer get positive
/// curvature. nullopt when fewer than 6 points or the fit is rank deficient.
std::optional<FundamentalForms> fit_monge_patch(const TriMesh& mesh, std::uint32_t vertex, const Vec3& normal,
                                                const std::vector<std::uint32_t>& nbhd);

/// Roots of det(II - k I) = 0, descending. Throws InvalidArgument for an
/// invalid metric.
PrincipalCurvatures principal_curvatures(const FundamentalForms& ff);

CurvatureDescriptors curvature_descriptors(const PrincipalCurvatures& pc);

/// Signed distance of the vertex to the PCA plane of its neighbourhood; the
/// plane normal is oriented along the vertex normal. nullopt when the
/// neighbourhood is collinear or smaller than 3.
std::optional<double> local_depth(const TriMesh& mesh, std::uint32_t vertex, const Vec3& normal,
                                  const std::vector<std::uint32_t>& nbhd);

struct DescriptorOptions {
  NeighborhoodSpec neighborhood;
  unsigned threads = 1;
};

/// Fields for the requested geometric kinds (K, H, SI, LD; GL is rendered
/// from the texture instead). Curvature fits are shared between K, H and SI.
/// Throws Numerical when more than half of the vertices are invalid.
std::vector<DescriptorField> descriptor_fields(const SurfaceIndex& surface, std::span<const DescriptorKind> kinds,
                                               const DescriptorOptions& options = {});

DescriptorField descriptor_field(const TriMesh& mesh, DescriptorKind kind, const NeighborhoodSpec& spec = {},
                                 const PrincipalFrame* frame = nullptr);

/// Field on a resampled mesh read through its correspondence to the original.
DescriptorField map_field(const DescriptorField& original, std::span<const std::uint32_t> correspondence);

}  // namespace fgai
