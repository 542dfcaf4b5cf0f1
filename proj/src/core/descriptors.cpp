#include "descriptors.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <thread>
#include <unordered_map>

#include "error.hpp"
#include "mesh_io.hpp"
#include "resample.hpp"

namespace fgai {

std::string_view kind_name(DescriptorKind kind) {
  switch (kind) {
    case DescriptorKind::K: return "K";
    case DescriptorKind::H: return "H";
    case DescriptorKind::GL: return "GL";
    case DescriptorKind::LD: return "LD";
    case DescriptorKind::SI: return "SI";
  }
  return "?";
}

std::optional<DescriptorKind> parse_kind(std::string_view name) {
  for (DescriptorKind k : kAllKinds)
    if (kind_name(k) == name) return k;
  return std::nullopt;
}

std::size_t DescriptorField::valid_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), 1));
}

SurfaceIndex::SurfaceIndex(const TriMesh& mesh, const PrincipalFrame* frame)
    : mesh_(&mesh), graph_(build_edge_graph(mesh)), normals_(vertex_normals(mesh)), mean_edge_(fgai::mean_edge_length(mesh)) {
  if (frame) {
    Vec3 mean = Vec3::Zero();
    for (const Vec3& n : normals_) mean += n;
    if (mean.dot(frame->axes[2]) < 0.0)
      for (Vec3& n : normals_) n = -n;
  }
}

std::vector<std::uint32_t> SurfaceIndex::neighborhood(std::uint32_t seed, double radius) const {
  if (seed >= graph_.adjacency.size()) fail(ErrorCode::InvalidArgument, "vertex index out of range");
  if (graph_.adjacency[seed].empty())
    fail(ErrorCode::DegenerateGeometry, "vertex " + std::to_string(seed) + " is isolated (empty neighbourhood)");

  // Sparse Dijkstra: only touched vertices are stored.
  std::unordered_map<std::uint32_t, double> dist{{seed, 0.0}};
  std::vector<std::uint32_t> out;
  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  queue.push({0.0, seed});
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (d > dist[v]) continue;
    out.push_back(v);
    for (const auto& arc : graph_.adjacency[v]) {
      const double nd = d + arc.length;
      if (nd > radius) continue;
      auto [it, inserted] = dist.try_emplace(arc.to, nd);
      if (inserted || nd < it->second) {
        it->second = nd;
        queue.push({nd, arc.to});
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::uint32_t> neighborhood(const TriMesh& mesh, std::uint32_t vertex, const NeighborhoodSpec& spec) {
  require(spec.radius_multiplier > 0, "radius multiplier must be positive");
  const SurfaceIndex index(mesh);
  return index.neighborhood(vertex, spec.radius_multiplier * index.mean_edge_length());
}

namespace {

// Orthonormal tangent basis; deterministic in the normal.
std::pair<Vec3, Vec3> tangent_basis(const Vec3& n) {
  const Vec3 helper = std::abs(n.x()) <= std::abs(n.y()) && std::abs(n.x()) <= std::abs(n.z()) ? Vec3::UnitX()
                      : std::abs(n.y()) <= std::abs(n.z())                                      ? Vec3::UnitY()
                                                                                                : Vec3::UnitZ();
  const Vec3 t1 = n.cross(helper).normalized();
  return {t1, n.cross(t1)};
}

}  // namespace

std::optional<FundamentalForms> fit_monge_patch(const TriMesh& mesh, std::uint32_t vertex, const Vec3& normal,
                                                const std::vector<std::uint32_t>& nbhd) {
  if (nbhd.size() < 6 || !(normal.squaredNorm() > 0)) return std::nullopt;
  const Vec3 height = -normal.normalized();
  const auto [t1, t2] = tangent_basis(height);
  const Vec3& origin = mesh.vertices[vertex];

  double scale = 0.0;
  for (auto i : nbhd) scale = std::max(scale, (mesh.vertices[i] - origin).norm());
  if (!(scale > 0)) return std::nullopt;

  const auto rows = static_cast<Eigen::Index>(nbhd.size());
  Eigen::MatrixXd A(rows, 6);
  Eigen::VectorXd z(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vec3 d = (mesh.vertices[nbhd[static_cast<std::size_t>(r)]] - origin) / scale;
    const double x = d.dot(t1), y = d.dot(t2);
    A.row(r) << x * x, x * y, y * y, x, y, 1.0;
    z[r] = d.dot(height);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-10);
  if (qr.rank() < 6) return std::nullopt;
  const Eigen::VectorXd c = qr.solve(z);

  // Undo the scaling: second-order terms carry 1/scale.
  const double zxx = 2.0 * c[0] / scale, zxy = c[1] / scale, zyy = 2.0 * c[2] / scale;
  const double zx = c[3], zy = c[4];
  const double W = std::sqrt(1.0 + zx * zx + zy * zy);
  FundamentalForms ff;
  ff.E = 1.0 + zx * zx;
  ff.F = zx * zy;
  ff.G = 1.0 + zy * zy;
  ff.L = zxx / W;
  ff.M = zxy / W;
  ff.N = zyy / W;
  return ff;
}

PrincipalCurvatures principal_curvatures(const FundamentalForms& ff) {
  const double det_i = ff.E * ff.G - ff.F * ff.F;
  if (!(ff.E > 0) || !(ff.G > 0) || !(det_i > 0))
    fail(ErrorCode::InvalidArgument, "first fundamental form is not positive definite");
  const double H = (ff.E * ff.N + ff.G * ff.L - 2.0 * ff.F * ff.M) / (2.0 * det_i);
  const double K = (ff.L * ff.N - ff.M * ff.M) / det_i;
  double disc = H * H - K;
  if (disc < 0) {
    const double scale = std::max({H * H, std::abs(K), std::numeric_limits<double>::min()});
    if (disc < -1e-12 * scale) fail(ErrorCode::Internal, "negative discriminant in principal curvature equation");
    disc = 0;
  }
  const double root = std::sqrt(disc);
  return {H + root, H - root};
}

CurvatureDescriptors curvature_descriptors(const PrincipalCurvatures& pc) {
  CurvatureDescriptors d;
  d.K = pc.max * pc.min;
  d.H = (pc.max + pc.min) / 2.0;
  const double eps = 1e-8 * std::max({std::abs(pc.max), std::abs(pc.min), 1.0});
  if (pc.max - pc.min < eps) {
    d.SI = d.H > eps ? 0.0 : d.H < -eps ? 1.0 : 0.5;
  } else {
    d.SI = 0.5 - std::atan((pc.max + pc.min) / (pc.max - pc.min)) / std::numbers::pi;
    d.SI = std::clamp(d.SI, 0.0, 1.0);
  }
  return d;
}

std::optional<double> local_depth(const TriMesh& mesh, std::uint32_t vertex, const Vec3& normal,
                                  const std::vector<std::uint32_t>& nbhd) {
  if (nbhd.size() < 3) return std::nullopt;
  Vec3 centroid = Vec3::Zero();
  for (auto i : nbhd) centroid += mesh.vertices[i];
  centroid /= static_cast<double>(nbhd.size());
  Mat3 cov = Mat3::Zero();
  for (auto i : nbhd) {
    const Vec3 d = mesh.vertices[i] - centroid;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(nbhd.size());
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  if (eig.info() != Eigen::Success) return std::nullopt;
  const Vec3 values = eig.eigenvalues();
  if (!(values[2] > 0) || values[1] <= 1e-12 * values[2]) return std::nullopt;
  Vec3 plane_normal = eig.eigenvectors().col(0);
  if (plane_normal.dot(normal) < 0) plane_normal = -plane_normal;
  return (mesh.vertices[vertex] - centroid).dot(plane_normal);
}

namespace {

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t, std::size_t)>& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n / 64 + 1)));
  if (threads == 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo < hi) pool.emplace_back(body, lo, hi);
  }
  for (auto& th : pool) th.join();
}

}  // namespace

std::vector<DescriptorField> descriptor_fields(const SurfaceIndex& surface, std::span<const DescriptorKind> kinds,
                                               const DescriptorOptions& options) {
  require(options.neighborhood.radius_multiplier > 0, "radius multiplier must be positive");
  const TriMesh& mesh = surface.mesh();
  const std::size_t n = mesh.vertices.size();
  bool need_curv = false, need_ld = false;
  for (DescriptorKind k : kinds) {
    if (k == DescriptorKind::GL) fail(ErrorCode::InvalidArgument, "GL fields come from the texture, not the mesh");
    if (k == DescriptorKind::LD) need_ld = true;
    else need_curv = true;
  }

  std::vector<std::optional<CurvatureDescriptors>> curv(n);
  std::vector<std::optional<double>> depth(n);
  const double radius = options.neighborhood.radius_multiplier * surface.mean_edge_length();
  parallel_for(n, options.threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t v = lo; v < hi; ++v) {
      const auto vi = static_cast<std::uint32_t>(v);
      if (surface.graph().adjacency[v].empty()) continue;
      const auto nbhd = surface.neighborhood(vi, radius);
      const Vec3& normal = surface.normals()[v];
      if (need_curv) {
        if (auto ff = fit_monge_patch(mesh, vi, normal, nbhd)) curv[v] = curvature_descriptors(principal_curvatures(*ff));
      }
      if (need_ld) depth[v] = local_depth(mesh, vi, normal, nbhd);
    }
  });

  std::vector<DescriptorField> out;
  for (DescriptorKind k : kinds) {
    DescriptorField f;
    f.kind = k;
    f.values.assign(n, 0.0);
    f.valid.assign(n, 0);
    for (std::size_t v = 0; v < n; ++v) {
      if (k == DescriptorKind::LD) {
        if (depth[v]) {
          f.values[v] = *depth[v];
          f.valid[v] = 1;
        }
      } else if (curv[v]) {
        f.values[v] = k == DescriptorKind::K ? curv[v]->K : k == DescriptorKind::H ? curv[v]->H : curv[v]->SI;
        f.valid[v] = 1;
      }
    }
    if (2 * f.valid_count() < n)
      fail(ErrorCode::Numerical, std::string("more than half of the vertices are invalid for ") +
                                     std::string(kind_name(k)));
    out.push_back(std::move(f));
  }
  return out;
}

DescriptorField descriptor_field(const TriMesh& mesh, DescriptorKind kind, const NeighborhoodSpec& spec,
                                 const PrincipalFrame* frame) {
  const SurfaceIndex surface(mesh, frame);
  const std::array<DescriptorKind, 1> kinds{kind};
  return std::move(descriptor_fields(surface, kinds, {spec, 1}).front());
}

DescriptorField map_field(const DescriptorField& original, std::span<const std::uint32_t> correspondence) {
  DescriptorField f;
  f.kind = original.kind;
  f.values.reserve(correspondence.size());
  f.valid.reserve(correspondence.size());
  for (auto src : correspondence) {
    if (src >= original.values.size()) fail(ErrorCode::InvalidArgument, "correspondence index out of range");
    f.values.push_back(original.values[src]);
    f.valid.push_back(original.valid[src]);
  }
  return f;
}

}  // namespace fgai
