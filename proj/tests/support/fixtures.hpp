#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include "core/manifest.hpp"
#include "core/mesh_io.hpp"

namespace fixtures {

using fgai::TriMesh;
using fgai::Vec2;
using fgai::Vec3;

/// Regular (nx x ny) vertex grid over [-w/2, w/2] x [-h/2, h/2] at z = height(x, y),
/// split along alternating diagonals. `jitter` moves x, y by up to jitter * spacing.
TriMesh height_field(int nx, int ny, double w, double h, const std::function<double(double, double)>& height,
                     double jitter = 0.0, std::uint64_t seed = 1);
TriMesh plane_grid(int nx, int ny, double spacing, double z = 0.0);

/// Subdivided icosahedron projected to a sphere (level 5: 10242 vertices).
TriMesh icosphere(int level, double radius = 1.0);
TriMesh icosahedron(double edge);
/// Open cylinder around the z axis, outward-facing winding.
TriMesh cylinder(double radius, double height, int around, int along);

/// Face-like height field: ellipse-cropped dome with a nose ridge, eye
/// sockets and a mouth groove; jittered samples, Delaunay facets.
TriMesh face_like(int approx_vertices, std::uint64_t seed = 7);

/// Planar uv from x, y extents of the mesh, per corner.
std::vector<std::array<Vec2, 3>> planar_uv(const TriMesh& mesh);

fgai::TexturedMesh textured(const TriMesh& mesh, int tex_w, int tex_h,
                            const std::function<std::uint8_t(int, int)>& texel);

Vec3 transform(const Vec3& p, const Eigen::Matrix3d& R, const Vec3& t, double s = 1.0);
TriMesh transformed(const TriMesh& mesh, const Eigen::Matrix3d& R, const Vec3& t, double s = 1.0);
Eigen::Matrix3d random_rotation(std::mt19937_64& rng);

/// Synthetic scans for the end-to-end suites: a base surface carrying either a
/// bump or a dent, with a procedural texture, written as OBJ + PNG. Returns the
/// manifest (also written as manifest.csv in `dir`).
fgai::Manifest write_bump_dent_dataset(const std::filesystem::path& dir, int subjects, int scans_per_subject,
                                       std::uint64_t seed);

/// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);

}  // namespace fixtures
