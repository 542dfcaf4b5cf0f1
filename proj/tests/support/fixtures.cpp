#include "fixtures.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <unistd.h>

#include "core/image.hpp"

namespace fixtures {

TriMesh height_field(int nx, int ny, double w, double h, const std::function<double(double, double)>& height,
                     double jitter, std::uint64_t seed) {
  TriMesh m;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double dx = w / (nx - 1), dy = h / (ny - 1);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      double x = -w / 2 + i * dx, y = -h / 2 + j * dy;
      if (jitter > 0 && i > 0 && j > 0 && i < nx - 1 && j < ny - 1) {
        x += jitter * dx * u(rng);
        y += jitter * dy * u(rng);
      }
      m.vertices.emplace_back(x, y, height(x, y));
    }
  auto id = [nx](int i, int j) { return static_cast<std::uint32_t>(j * nx + i); };
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      const auto a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      if ((i + j) % 2 == 0) {
        m.facets.push_back({a, b, c});
        m.facets.push_back({a, c, d});
      } else {
        m.facets.push_back({a, b, d});
        m.facets.push_back({b, c, d});
      }
    }
  return m;
}

TriMesh plane_grid(int nx, int ny, double spacing, double z) {
  return height_field(nx, ny, spacing * (nx - 1), spacing * (ny - 1), [z](double, double) { return z; });
}

TriMesh icosahedron(double edge) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriMesh m;
  m.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : m.vertices) v *= edge / 2.0;  // native edge length is 2
  m.facets = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
              {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
              {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
  return m;
}

TriMesh icosphere(int level, double radius) {
  TriMesh m = icosahedron(2.0);
  for (auto& v : m.vertices) v.normalize();
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mid;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
      const auto id = static_cast<std::uint32_t>(m.vertices.size() - 1);
      mid.emplace(key, id);
      return id;
    };
    std::vector<fgai::Facet> next;
    for (const auto& f : m.facets) {
      const auto a = midpoint(f[0], f[1]), b = midpoint(f[1], f[2]), c = midpoint(f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    m.facets = std::move(next);
  }
  for (auto& v : m.vertices) v *= radius;
  return m;
}

TriMesh cylinder(double radius, double height, int around, int along) {
  TriMesh m;
  for (int j = 0; j < along; ++j)
    for (int i = 0; i < around; ++i) {
      const double th = 2.0 * M_PI * i / around;
      m.vertices.emplace_back(radius * std::cos(th), radius * std::sin(th), -height / 2 + height * j / (along - 1));
    }
  auto id = [around](int i, int j) { return static_cast<std::uint32_t>(j * around + (i % around)); };
  for (int j = 0; j + 1 < along; ++j)
    for (int i = 0; i < around; ++i) {
      m.facets.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.facets.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return m;
}

namespace {

double face_height(double x, double y) {
  const double a = 80.0, b = 100.0;
  const double r2 = (x / a) * (x / a) + (y / b) * (y / b);
  double z = 40.0 * std::sqrt(std::max(0.0, 1.0 - 0.8 * r2));
  z += 15.0 * std::exp(-(x * x / (2 * 8.0 * 8.0) + (y + 5) * (y + 5) / (2 * 18.0 * 18.0)));
  for (double ex : {-30.0, 30.0}) z -= 6.0 * std::exp(-((x - ex) * (x - ex) + (y - 25) * (y - 25)) / (2 * 10.0 * 10.0));
  z -= 4.0 * std::exp(-(x * x / (2 * 20.0 * 20.0) + (y + 45) * (y + 45) / (2 * 5.0 * 5.0)));
  return z;
}

/// Keeps facets whose vertices all satisfy `inside`, then drops unreferenced vertices.
TriMesh crop(const TriMesh& m, const std::function<bool(const Vec3&)>& inside) {
  std::vector<std::int64_t> remap(m.vertices.size(), -1);
  TriMesh out;
  for (const auto& f : m.facets) {
    if (!inside(m.vertices[f[0]]) || !inside(m.vertices[f[1]]) || !inside(m.vertices[f[2]])) continue;
    fgai::Facet g;
    for (int i = 0; i < 3; ++i) {
      if (remap[f[i]] < 0) {
        remap[f[i]] = static_cast<std::int64_t>(out.vertices.size());
        out.vertices.push_back(m.vertices[f[i]]);
      }
      g[i] = static_cast<std::uint32_t>(remap[f[i]]);
    }
    out.facets.push_back(g);
  }
  return out;
}

}  // namespace

TriMesh face_like(int approx_vertices, std::uint64_t seed) {
  // The ellipse covers pi/4 of its bounding box.
  const double a = 80.0, b = 100.0;
  const double box_vertices = approx_vertices / (M_PI / 4.0);
  const int nx = static_cast<int>(std::round(std::sqrt(box_vertices * a / b)));
  const int ny = static_cast<int>(std::round(box_vertices / nx));
  const TriMesh grid = height_field(nx, ny, 2 * a, 2 * b, face_height, 0.25, seed);
  return crop(grid, [&](const Vec3& p) { return (p.x() / a) * (p.x() / a) + (p.y() / b) * (p.y() / b) <= 1.0; });
}

std::vector<std::array<Vec2, 3>> planar_uv(const TriMesh& mesh) {
  Eigen::Vector2d lo(1e300, 1e300), hi(-1e300, -1e300);
  for (const auto& v : mesh.vertices) {
    lo = lo.cwiseMin(v.head<2>());
    hi = hi.cwiseMax(v.head<2>());
  }
  const Eigen::Vector2d ext = (hi - lo).cwiseMax(1e-12);
  std::vector<std::array<Vec2, 3>> uv(mesh.facets.size());
  for (std::size_t f = 0; f < uv.size(); ++f)
    for (int i = 0; i < 3; ++i) {
      const Vec3& p = mesh.vertices[mesh.facets[f][i]];
      uv[f][i] = Vec2(0.02 + 0.96 * (p.x() - lo.x()) / ext.x(), 0.02 + 0.96 * (p.y() - lo.y()) / ext.y());
    }
  return uv;
}

fgai::TexturedMesh textured(const TriMesh& mesh, int tex_w, int tex_h,
                            const std::function<std::uint8_t(int, int)>& texel) {
  fgai::TexturedMesh t;
  t.geometry = mesh;
  t.corner_uv = planar_uv(mesh);
  t.texture = fgai::GrayImage(tex_w, tex_h);
  for (int r = 0; r < tex_h; ++r)
    for (int c = 0; c < tex_w; ++c) t.texture.at(r, c) = texel(c, r);
  return t;
}

Vec3 transform(const Vec3& p, const Eigen::Matrix3d& R, const Vec3& t, double s) { return s * (R * p) + t; }

TriMesh transformed(const TriMesh& mesh, const Eigen::Matrix3d& R, const Vec3& t, double s) {
  TriMesh out = mesh;
  for (auto& v : out.vertices) v = transform(v, R, t, s);
  return out;
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized().toRotationMatrix();
}

fgai::Manifest write_bump_dent_dataset(const std::filesystem::path& dir, int subjects, int scans_per_subject,
                                       std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  fgai::Manifest manifest;
  for (int s = 0; s < subjects; ++s) {
    // Subject-specific base curvature.
    const double dome = 6.0 + 2.0 * u(rng);
    for (int k = 0; k < scans_per_subject; ++k) {
      const bool bump = k % 2 == 0;
      const double amp = (bump ? 1.0 : -1.0) * (5.0 + 1.0 * u(rng));
      const double cx = 3.0 * u(rng), cy = 3.0 * u(rng);
      const std::uint64_t mesh_seed = rng();
      auto height = [=](double x, double y) {
        const double r2 = (x * x + y * y) / (40.0 * 40.0);
        return dome * (1.0 - r2) + amp * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2 * 8.0 * 8.0));
      };
      const TriMesh mesh = height_field(41, 41, 80.0, 80.0, height, 0.2, mesh_seed);
      const double phase = 6.28 * (0.5 + 0.5 * u(rng));
      const fgai::TexturedMesh tm = textured(mesh, 128, 128, [phase](int c, int r) {
        return static_cast<std::uint8_t>(128 + 60 * std::sin(c * 0.07 + phase) * std::cos(r * 0.05));
      });
      const std::string id = "s" + std::to_string(s) + "_" + std::to_string(k);
      fgai::write_obj(dir / (id + ".obj"), tm.geometry, &tm.corner_uv);
      fgai::write_png(dir / (id + ".png"), tm.texture);
      manifest.rows.push_back({id, id + ".obj", id + ".png", "subj" + std::to_string(s), bump ? "bump" : "dent", {}, {}});
    }
  }
  fgai::write_manifest(dir / "manifest.csv", manifest);
  for (auto& r : manifest.rows) {
    r.mesh = dir / r.mesh;
    r.texture = dir / r.texture;
  }
  return manifest;
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("fgai_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace fixtures
