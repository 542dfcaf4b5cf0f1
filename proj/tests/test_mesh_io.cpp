#include <doctest.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "core/error.hpp"
#include "core/image.hpp"
#include "core/mesh_io.hpp"
#include "fixtures.hpp"

using namespace fgai;

namespace {

TexturedMesh parse(const std::string& text) {
  std::istringstream in(text);
  return parse_obj(in, "t.obj");
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(0);
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

// Independent edge oracle: every facet side keyed as an ordered pair in a std::set.
double brute_mean_edge(const TriMesh& m) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (const auto& f : m.facets)
    for (int i = 0; i < 3; ++i) {
      const auto a = f[i], b = f[(i + 1) % 3];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  long double sum = 0;
  for (const auto& [a, b] : edges) {
    const auto d = m.vertices[a] - m.vertices[b];
    sum += std::sqrt(static_cast<long double>(d.x()) * d.x() + static_cast<long double>(d.y()) * d.y() +
                     static_cast<long double>(d.z()) * d.z());
  }
  return static_cast<double>(sum / edges.size());
}

}  // namespace

TEST_CASE("single triangle OBJ loads") {
  const auto m = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nf 1/1 2/2 3/3\n");
  CHECK(m.geometry.vertices.size() == 3);
  CHECK(m.geometry.facets.size() == 1);
  CHECK(m.corner_uv.size() == 1);
  CHECK(m.corner_uv[0][1].x() == 1.0);
  CHECK(m.dropped_facets == 0);
}

TEST_CASE("out-of-range facet index is a parse error naming the line") {
  const std::string obj = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nf 1/1 2/2 5/3\n";
  CHECK(code_of([&] { parse(obj); }) == ErrorCode::Parse);
  CHECK(message_of([&] { parse(obj); }).find("t.obj:8") != std::string::npos);
}

TEST_CASE("missing texture coordinates are rejected") {
  const std::string msg = message_of([] { parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n"); });
  CHECK(msg.find("mesh lacks texture mapping") != std::string::npos);
  CHECK(code_of([] { parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n"); }) == ErrorCode::MissingTextureMapping);
}

TEST_CASE("zero-area facet among 100 is dropped and counted") {
  // 10 x 6 grid gives 5 x 9 x 2 = 90 facets; pad to 100 with a strip, then
  // collapse one facet by duplicating a vertex position.
  TriMesh grid = fixtures::plane_grid(11, 6, 1.0);
  REQUIRE(grid.facets.size() == 100);
  const auto f = grid.facets[37];
  grid.vertices.push_back(grid.vertices[f[0]]);  // coincident copy
  grid.facets[37][1] = static_cast<std::uint32_t>(grid.vertices.size() - 1);
  const auto uv = fixtures::planar_uv(grid);
  std::ostringstream obj;
  obj.precision(17);
  for (const auto& v : grid.vertices) obj << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& c : uv)
    for (const auto& t : c) obj << "vt " << t.x() << ' ' << t.y() << '\n';
  for (std::size_t i = 0; i < grid.facets.size(); ++i)
    obj << "f " << grid.facets[i][0] + 1 << '/' << 3 * i + 1 << ' ' << grid.facets[i][1] + 1 << '/' << 3 * i + 2 << ' '
        << grid.facets[i][2] + 1 << '/' << 3 * i + 3 << '\n';
  const auto m = parse(obj.str());
  CHECK(m.geometry.facets.size() == 99);
  CHECK(m.dropped_facets == 1);
}

TEST_CASE("quads are fan-triangulated; negative indices and v/vt/vn corners accepted") {
  const auto m = parse(
      "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 1 1\nvt 0 1\nvn 0 0 1\n"
      "g group\nusemtl mat\nf -4/-4/1 -3/-3/1 -2/-2/1 -1/-1/1\n");
  REQUIRE(m.geometry.facets.size() == 2);
  CHECK(m.geometry.facets[0] == Facet{0, 1, 2});
  CHECK(m.geometry.facets[1] == Facet{0, 2, 3});
  CHECK(m.corner_uv[1][2].y() == 1.0);
}

TEST_CASE("uv outside [0,1] wraps by repeat") {
  const auto m = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 1.25 -0.25\nvt 2 0.5\nvt 0.5 3.75\nf 1/1 2/2 3/3\n");
  for (const auto& t : m.corner_uv[0]) {
    CHECK(t.x() >= 0.0);
    CHECK(t.x() <= 1.0);
    CHECK(t.y() >= 0.0);
    CHECK(t.y() <= 1.0);
  }
  CHECK(m.corner_uv[0][0].x() == doctest::Approx(0.25));
  CHECK(m.corner_uv[0][0].y() == doctest::Approx(0.75));
  CHECK(m.corner_uv[0][2].y() == doctest::Approx(0.75));
}

TEST_CASE("facet repeating a vertex index is dropped") {
  const auto m = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nf 1/1 2/1 3/1\nf 1/1 1/1 2/1\n");
  CHECK(m.geometry.facets.size() == 1);
  CHECK(m.dropped_facets == 1);
}

TEST_CASE("mean edge length: right triangle and icosahedron") {
  TriMesh tri;
  tri.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  tri.facets = {{0, 1, 2}};
  CHECK(mean_edge_length(tri) == doctest::Approx((2.0 + std::sqrt(2.0)) / 3.0).epsilon(1e-15));
  CHECK(mean_edge_length(fixtures::icosahedron(2.0)) == doctest::Approx(2.0).epsilon(1e-14));
  const auto metrics = mesh_metrics(fixtures::icosahedron(2.0));
  CHECK(metrics.vertex_count == 12);
  CHECK(metrics.facet_count == 20);
}

TEST_CASE("mean edge length matches brute-force edge set on a 10k-vertex sphere") {
  const TriMesh s = fixtures::icosphere(5, 1.0);
  REQUIRE(s.vertices.size() >= 10000);
  CHECK(std::abs(mean_edge_length(s) - brute_mean_edge(s)) < 1e-12);
}

TEST_CASE("loading is deterministic and round-trips through write_obj") {
  const auto dir = fixtures::temp_dir("meshio");
  const TriMesh face = fixtures::face_like(800);
  const auto tm = fixtures::textured(face, 32, 32, [](int c, int r) { return static_cast<std::uint8_t>(c * 7 + r); });
  write_obj(dir / "a.obj", tm.geometry, &tm.corner_uv);
  write_png(dir / "a.png", tm.texture);
  const auto a = load_textured_mesh(dir / "a.obj", dir / "a.png");
  const auto b = load_textured_mesh(dir / "a.obj", dir / "a.png");
  CHECK(a.geometry.vertices == b.geometry.vertices);
  CHECK(a.geometry.facets == b.geometry.facets);
  CHECK(a.corner_uv == b.corner_uv);
  CHECK(a.texture.pixels == b.texture.pixels);
  CHECK(a.geometry.facets == face.facets);
  CHECK(a.texture.pixels == tm.texture.pixels);
  double max_err = 0;
  for (std::size_t i = 0; i < face.vertices.size(); ++i)
    max_err = std::max(max_err, (a.geometry.vertices[i] - face.vertices[i]).norm());
  CHECK(max_err < 1e-12);
}

TEST_CASE("unreadable inputs are I/O errors") {
  const auto dir = fixtures::temp_dir("meshio_io");
  CHECK(code_of([&] { load_textured_mesh(dir / "missing.obj", dir / "missing.png"); }) == ErrorCode::Io);
  std::ofstream(dir / "t.obj") << "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nf 1/1 2/1 3/1\n";
  std::ofstream(dir / "bad.png") << "not an image";
  CHECK(code_of([&] { load_textured_mesh(dir / "t.obj", dir / "bad.png"); }) == ErrorCode::Io);
}

TEST_CASE("RGB textures convert by integer-rounded Rec.601 luma; gray is idempotent") {
  CHECK(rgb_to_gray(255, 255, 255) == 255);
  CHECK(rgb_to_gray(0, 0, 0) == 0);
  CHECK(rgb_to_gray(255, 0, 0) == 76);   // 76.245
  CHECK(rgb_to_gray(0, 255, 0) == 150);  // 149.685
  CHECK(rgb_to_gray(0, 0, 255) == 29);   // 29.07
  for (int g = 0; g < 256; ++g) CHECK(rgb_to_gray(g, g, g) == g);

  const auto png = read_gray(FGAI_TEST_DATA "/rgb3x2.png");
  REQUIRE(png.width == 3);
  REQUIRE(png.height == 2);
  CHECK(png.at(0, 0) == 76);
  CHECK(png.at(0, 1) == 150);
  CHECK(png.at(0, 2) == 29);
  CHECK(png.at(1, 0) == rgb_to_gray(10, 20, 30));

  const auto dir = fixtures::temp_dir("gray");
  write_png(dir / "g.png", png);
  const auto again = read_gray(dir / "g.png");
  CHECK(again.pixels == png.pixels);

  const auto jpeg = read_gray(FGAI_TEST_DATA "/gray8x4.jpg");
  CHECK(jpeg.width == 8);
  CHECK(jpeg.height == 4);
  CHECK(std::abs(int(jpeg.at(3, 7)) - 248) <= 2);
  const auto rgb_jpeg = read_gray(FGAI_TEST_DATA "/rgb4x2.jpg");
  CHECK(std::abs(int(rgb_jpeg.at(1, 3)) - int(rgb_to_gray(200, 100, 50))) <= 2);
}
