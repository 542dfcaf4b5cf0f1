#include "resample.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "delaunay.hpp"
#include "error.hpp"
#include "point_grid.hpp"

namespace fgai {

PrincipalFrame principal_frame(const TriMesh& mesh) {
  const std::size_t n = mesh.vertices.size();
  if (n < 3) fail(ErrorCode::DegenerateGeometry, "principal frame needs at least 3 vertices");

  PrincipalFrame frame;
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : mesh.vertices) centroid += p;
  centroid /= static_cast<double>(n);
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : mesh.vertices) {
    const Vec3 d = p - centroid;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  if (eig.info() != Eigen::Success) fail(ErrorCode::Numerical, "covariance eigendecomposition failed");
  const Vec3 values = eig.eigenvalues();  // ascending
  if (!(values[2] > 0.0) || values[1] <= 1e-12 * values[2])
    fail(ErrorCode::DegenerateGeometry, "vertices are collinear (rank-deficient covariance)");

  Vec3 e1 = eig.eigenvectors().col(2);
  Vec3 e3 = eig.eigenvectors().col(0);

  // e1: positive third moment along the axis, so the frame follows the mesh
  // under rigid motions instead of the eigensolver's sign choice.
  double skew = 0.0;
  for (const Vec3& p : mesh.vertices) skew += std::pow((p - centroid).dot(e1), 3);
  if (skew < 0.0) e1 = -e1;

  Vec3 mean_normal = Vec3::Zero();
  for (const Vec3& nrm : vertex_normals(mesh)) mean_normal += nrm;
  if (mean_normal.dot(e3) < 0.0) e3 = -e3;

  frame.origin = centroid;
  frame.axes = {e1.normalized(), e3.cross(e1).normalized(), e3.normalized()};
  frame.eigenvalues = {values[2], values[1], values[0]};
  return frame;
}

double grid_spacing(const TriMesh& mesh, const PrincipalFrame& frame, const ResampleConfig& cfg) {
  require(cfg.step >= 1.0 && std::isfinite(cfg.step), "resample step must be >= 1");
  if (cfg.spacing_rule == SpacingRule::EdgeLength) return std::sqrt(cfg.step) * mean_edge_length(mesh);

  double area = 0.0;
  std::vector<char> used(mesh.vertices.size(), 0);
  for (const Facet& f : mesh.facets) {
    const Vec3 a = frame.to_local(mesh.vertices[f[0]]);
    const Vec3 b = frame.to_local(mesh.vertices[f[1]]);
    const Vec3 c = frame.to_local(mesh.vertices[f[2]]);
    area += 0.5 * std::abs((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
    for (auto v : f) used[v] = 1;
  }
  const auto count = static_cast<double>(std::count(used.begin(), used.end(), 1));
  if (!(area > 0.0)) fail(ErrorCode::DegenerateGeometry, "mesh has zero projected area");
  return std::sqrt(cfg.step * area / count);
}

namespace {

struct DepthSample {
  double depth = -std::numeric_limits<double>::infinity();
  bool covered = false;
};

}  // namespace

ResampledMesh resample(const TexturedMesh& textured, const PrincipalFrame& frame, const ResampleConfig& cfg) {
  const TriMesh& mesh = textured.geometry;
  const double h = grid_spacing(mesh, frame, cfg);

  std::vector<Vec3> local(mesh.vertices.size());
  for (std::size_t i = 0; i < local.size(); ++i) local[i] = frame.to_local(mesh.vertices[i]);

  double umin = std::numeric_limits<double>::infinity(), vmin = umin;
  double umax = -umin, vmax = -umin;
  for (const Facet& f : mesh.facets)
    for (auto vi : f) {
      umin = std::min(umin, local[vi].x());
      umax = std::max(umax, local[vi].x());
      vmin = std::min(vmin, local[vi].y());
      vmax = std::max(vmax, local[vi].y());
    }

  ResampledMesh out;
  out.frame = frame;
  out.spacing = h;
  out.i0 = static_cast<std::int64_t>(std::ceil(umin / h));
  out.j0 = static_cast<std::int64_t>(std::ceil(vmin / h));
  out.cols = static_cast<int>(static_cast<std::int64_t>(std::floor(umax / h)) - out.i0 + 1);
  out.rows = static_cast<int>(static_cast<std::int64_t>(std::floor(vmax / h)) - out.j0 + 1);
  if (out.cols <= 0 || out.rows <= 0) fail(ErrorCode::ResampleFailed, "resampling grid is empty");

  std::vector<DepthSample> grid(static_cast<std::size_t>(out.cols) * out.rows);
  constexpr double kInsideTol = 1e-10;
  for (const Facet& f : mesh.facets) {
    const Vec3& a = local[f[0]];
    const Vec3& b = local[f[1]];
    const Vec3& c = local[f[2]];
    const double det = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    if (det == 0.0) continue;  // edge-on in projection
    const auto i_lo = static_cast<std::int64_t>(std::ceil(std::min({a.x(), b.x(), c.x()}) / h));
    const auto i_hi = static_cast<std::int64_t>(std::floor(std::max({a.x(), b.x(), c.x()}) / h));
    const auto j_lo = static_cast<std::int64_t>(std::ceil(std::min({a.y(), b.y(), c.y()}) / h));
    const auto j_hi = static_cast<std::int64_t>(std::floor(std::max({a.y(), b.y(), c.y()}) / h));
    for (std::int64_t j = j_lo; j <= j_hi; ++j) {
      for (std::int64_t i = i_lo; i <= i_hi; ++i) {
        const double u = static_cast<double>(i) * h, v = static_cast<double>(j) * h;
        const double wb = ((u - a.x()) * (c.y() - a.y()) - (v - a.y()) * (c.x() - a.x())) / det;
        const double wc = ((b.x() - a.x()) * (v - a.y()) - (b.y() - a.y()) * (u - a.x())) / det;
        const double wa = 1.0 - wb - wc;
        if (wa < -kInsideTol || wb < -kInsideTol || wc < -kInsideTol) continue;
        const double depth = wa * a.z() + wb * b.z() + wc * c.z();
        DepthSample& s = grid[static_cast<std::size_t>(j - out.j0) * out.cols + static_cast<std::size_t>(i - out.i0)];
        // Folds: keep the sample nearest the viewer (+e3); first facet wins ties.
        if (!s.covered || depth > s.depth) {
          s.depth = depth;
          s.covered = true;
        }
      }
    }
  }

  out.coverage.assign(grid.size(), 0);
  std::vector<LatticePoint> lattice;
  for (int r = 0; r < out.rows; ++r)
    for (int c = 0; c < out.cols; ++c) {
      const DepthSample& s = grid[static_cast<std::size_t>(r) * out.cols + c];
      if (!s.covered) continue;
      out.coverage[static_cast<std::size_t>(r) * out.cols + c] = 1;
      const std::int64_t i = out.i0 + c, j = out.j0 + r;
      lattice.push_back({i, j});
      out.mesh.vertices.push_back(frame.to_world({static_cast<double>(i) * h, static_cast<double>(j) * h, s.depth}));
    }
  if (lattice.size() < 3) fail(ErrorCode::ResampleFailed, "fewer than 3 covered grid nodes");
  try {
    out.mesh.facets = delaunay_triangulate(lattice);
  } catch (const Error& e) {
    fail(ErrorCode::ResampleFailed, std::string("resampled grid cannot be triangulated: ") + e.what());
  }
  out.lattice.assign(lattice.begin(), lattice.end());

  std::vector<std::uint32_t> referenced;
  {
    std::vector<char> used(mesh.vertices.size(), 0);
    for (const Facet& f : mesh.facets)
      for (auto v : f) used[v] = 1;
    for (std::uint32_t i = 0; i < used.size(); ++i)
      if (used[i]) referenced.push_back(i);
  }
  const PointGrid index(mesh.vertices, referenced, std::max(h, mean_edge_length(mesh)));
  out.correspondence.resize(out.mesh.vertices.size());
  for (std::size_t v = 0; v < out.mesh.vertices.size(); ++v) out.correspondence[v] = index.nearest(out.mesh.vertices[v]);
  return out;
}

std::vector<std::optional<Vec2>> vertex_uv(const TexturedMesh& mesh) {
  std::vector<std::optional<Vec2>> uv(mesh.geometry.vertices.size());
  for (std::size_t f = 0; f < mesh.geometry.facets.size(); ++f)
    for (int k = 0; k < 3; ++k) {
      auto& slot = uv[mesh.geometry.facets[f][k]];
      if (!slot) slot = mesh.corner_uv[f][k];
    }
  return uv;
}

TextureMap rebuild_texture_map(const ResampledMesh& resampled, const TexturedMesh& original) {
  if (original.texture.empty()) fail(ErrorCode::InvalidArgument, "original mesh has no texture");
  if (resampled.correspondence.size() != resampled.mesh.vertices.size())
    fail(ErrorCode::InvalidArgument, "resampled mesh has no correspondence");
  const auto uv = vertex_uv(original);

  TextureMap map;
  map.texture_width = original.texture.width;
  map.texture_height = original.texture.height;
  map.vertex_pixels.reserve(resampled.correspondence.size());
  for (std::uint32_t src : resampled.correspondence) {
    if (src >= uv.size() || !uv[src])
      fail(ErrorCode::Internal, "original vertex " + std::to_string(src) + " carries no texture coordinate");
    map.vertex_pixels.push_back(uv_to_pixel(*uv[src], map.texture_width, map.texture_height));
  }
  map.facet_pixels.reserve(resampled.mesh.facets.size());
  for (const Facet& f : resampled.mesh.facets)
    map.facet_pixels.push_back({map.vertex_pixels[f[0]], map.vertex_pixels[f[1]], map.vertex_pixels[f[2]]});
  return map;
}

}  // namespace fgai
