#include "mesh_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string_view>

#include "error.hpp"

namespace fgai {

std::vector<Vec3> vertex_normals(const TriMesh& mesh) {
  std::vector<Vec3> normals(mesh.vertices.size(), Vec3::Zero());
  for (const Facet& f : mesh.facets) {
    const Vec3 n = facet_cross(mesh, f);  // |n| = 2 * area
    for (auto v : f) normals[v] += n;
  }
  for (Vec3& n : normals) {
    const double len = n.norm();
    if (len > 0) n /= len;
  }
  return normals;
}

std::vector<std::array<std::uint32_t, 2>> unique_edges(const TriMesh& mesh) {
  std::vector<std::array<std::uint32_t, 2>> edges;
  edges.reserve(mesh.facets.size() * 3);
  for (const Facet& f : mesh.facets) {
    for (int i = 0; i < 3; ++i) {
      auto a = f[i], b = f[(i + 1) % 3];
      if (a > b) std::swap(a, b);
      edges.push_back({a, b});
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

EdgeGraph build_edge_graph(const TriMesh& mesh) {
  EdgeGraph g;
  g.adjacency.resize(mesh.vertices.size());
  for (const auto& [a, b] : unique_edges(mesh)) {
    const double len = (mesh.vertices[a] - mesh.vertices[b]).norm();
    g.adjacency[a].push_back({b, len});
    g.adjacency[b].push_back({a, len});
  }
  for (auto& arcs : g.adjacency)
    std::sort(arcs.begin(), arcs.end(), [](const auto& x, const auto& y) { return x.to < y.to; });
  return g;
}

double mean_edge_length(const TriMesh& mesh) {
  const auto edges = unique_edges(mesh);
  if (edges.empty()) fail(ErrorCode::DegenerateGeometry, "mesh has no edges");
  double sum = 0.0;
  for (const auto& [a, b] : edges) sum += (mesh.vertices[a] - mesh.vertices[b]).norm();
  return sum / static_cast<double>(edges.size());
}

MeshMetrics mesh_metrics(const TriMesh& mesh) {
  return {mean_edge_length(mesh), mesh.vertices.size(), mesh.facets.size()};
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

class ObjParser {
 public:
  explicit ObjParser(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::Parse, source_ + ":" + std::to_string(line_no_) + ": " + what);
  }

  double number(std::string_view tok) const {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(value))
      error("bad number '" + std::string(tok) + "'");
    return value;
  }

  // OBJ indices are 1-based; negative values count back from the end.
  std::uint32_t resolve(std::string_view tok, std::size_t count, const char* what) const {
    long long idx = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), idx);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || idx == 0)
      error(std::string("bad ") + what + " index '" + std::string(tok) + "'");
    const long long resolved = idx > 0 ? idx - 1 : static_cast<long long>(count) + idx;
    if (resolved < 0 || resolved >= static_cast<long long>(count))
      error(std::string(what) + " index " + std::to_string(idx) + " out of range (" + std::to_string(count) +
            " defined)");
    return static_cast<std::uint32_t>(resolved);
  }

  void parse(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no_;
      const std::string_view body = trim(std::string_view(line).substr(0, line.find('#')));
      if (body.empty()) continue;
      const auto toks = split_ws(body);
      const std::string_view key = toks[0];
      if (key == "v") {
        if (toks.size() < 4) error("vertex needs 3 coordinates");
        vertices_.emplace_back(number(toks[1]), number(toks[2]), number(toks[3]));
      } else if (key == "vt") {
        if (toks.size() < 3) error("texture coordinate needs 2 values");
        uvs_.emplace_back(number(toks[1]), number(toks[2]));
      } else if (key == "f") {
        if (toks.size() < 4) error("facet needs at least 3 corners");
        face_lines_.push_back(line_no_);
        face_tokens_.emplace_back(toks.begin() + 1, toks.end());
      }
      // vn, vp, o, g, s, usemtl, mtllib: ignored
    }
  }

  TexturedMesh finish() {
    if (uvs_.empty()) fail(ErrorCode::MissingTextureMapping, source_ + ": mesh lacks texture mapping");
    TexturedMesh mesh;
    mesh.geometry.vertices = vertices_;
    for (std::size_t fi = 0; fi < face_tokens_.size(); ++fi) {
      line_no_ = face_lines_[fi];
      std::vector<std::uint32_t> vi;
      std::vector<Vec2> uv;
      for (const std::string& corner : face_tokens_[fi]) {
        const auto slash = corner.find('/');
        if (slash == std::string::npos || slash + 1 >= corner.size() || corner[slash + 1] == '/')
          fail(ErrorCode::MissingTextureMapping,
               source_ + ":" + std::to_string(line_no_) + ": mesh lacks texture mapping (corner '" + corner + "')");
        const auto slash2 = corner.find('/', slash + 1);
        const std::string_view cv(corner);
        vi.push_back(resolve(cv.substr(0, slash), vertices_.size(), "vertex"));
        const std::string_view tv =
            cv.substr(slash + 1, slash2 == std::string::npos ? std::string::npos : slash2 - slash - 1);
        uv.push_back(wrap(uvs_[resolve(tv, uvs_.size(), "texture")]));
      }
      for (std::size_t k = 1; k + 1 < vi.size(); ++k) {
        const Facet f{vi[0], vi[k], vi[k + 1]};
        const std::array<Vec2, 3> fuv{uv[0], uv[k], uv[k + 1]};
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2] || degenerate(mesh.geometry, f)) {
          ++mesh.dropped_facets;
          continue;
        }
        mesh.geometry.facets.push_back(f);
        mesh.corner_uv.push_back(fuv);
      }
    }
    if (mesh.geometry.facets.empty()) fail(ErrorCode::DegenerateGeometry, source_ + ": no valid facets");
    return mesh;
  }

 private:
  // Repeat wrap mode; coordinates already inside [0,1] are kept verbatim.
  static Vec2 wrap(Vec2 uv) {
    for (int i = 0; i < 2; ++i)
      if (uv[i] < 0.0 || uv[i] > 1.0) uv[i] -= std::floor(uv[i]);
    return uv;
  }

  static bool degenerate(const TriMesh& m, const Facet& f) {
    const Vec3& a = m.vertices[f[0]];
    const Vec3& b = m.vertices[f[1]];
    const Vec3& c = m.vertices[f[2]];
    const double scale = std::max({(b - a).squaredNorm(), (c - b).squaredNorm(), (a - c).squaredNorm()});
    return !(scale > 0.0) || (b - a).cross(c - a).norm() <= 1e-12 * scale;
  }

  std::string source_;
  std::size_t line_no_ = 0;
  std::vector<Vec3> vertices_;
  std::vector<Vec2> uvs_;
  std::vector<std::size_t> face_lines_;
  std::vector<std::vector<std::string>> face_tokens_;
};

}  // namespace

TexturedMesh parse_obj(std::istream& in, const std::string& source_name) {
  ObjParser parser(source_name);
  parser.parse(in);
  return parser.finish();
}

TexturedMesh load_textured_mesh(const std::filesystem::path& mesh_path, const std::filesystem::path& texture_path) {
  std::ifstream in(mesh_path);
  if (!in) fail(ErrorCode::Io, "cannot open mesh " + mesh_path.string());
  TexturedMesh mesh = parse_obj(in, mesh_path.string());
  mesh.texture = read_gray(texture_path);
  if (mesh.texture.empty()) fail(ErrorCode::Io, "empty texture " + texture_path.string());
  return mesh;
}

void write_obj(const std::filesystem::path& path, const TriMesh& mesh,
               const std::vector<std::array<Vec2, 3>>* corner_uv) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << std::setprecision(17);
  for (const Vec3& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  if (corner_uv) {
    for (const auto& tri : *corner_uv)
      for (const Vec2& uv : tri) out << "vt " << uv.x() << ' ' << uv.y() << '\n';
  }
  for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
    out << 'f';
    for (int i = 0; i < 3; ++i) {
      out << ' ' << mesh.facets[f][i] + 1;
      if (corner_uv) out << '/' << 3 * f + i + 1;
    }
    out << '\n';
  }
  if (!out) fail(ErrorCode::Io, "failed writing " + path.string());
}

}  // namespace fgai
