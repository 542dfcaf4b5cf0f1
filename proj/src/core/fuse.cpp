#include "fuse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "error.hpp"

namespace fgai {

std::string combo_name(const Combo& combo) {
  std::string out;
  for (std::size_t i = 0; i < combo.size(); ++i) {
    if (i) out += '-';
    out += kind_name(combo[i]);
  }
  return out;
}

Combo canonical(Combo combo) {
  std::sort(combo.begin(), combo.end());
  return combo;
}

Combo parse_combo(std::string_view name, bool keep_order) {
  Combo combo{};
  std::size_t count = 0, pos = 0;
  while (pos <= name.size()) {
    const std::size_t dash = std::min(name.find('-', pos), name.size());
    const auto kind = parse_kind(name.substr(pos, dash - pos));
    if (!kind || count == 3) fail(ErrorCode::InvalidArgument, "bad combo '" + std::string(name) + "'");
    combo[count++] = *kind;
    pos = dash + 1;
  }
  if (count != 3) fail(ErrorCode::InvalidArgument, "combo '" + std::string(name) + "' needs three kinds");
  const Combo sorted = canonical(combo);
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    fail(ErrorCode::InvalidArgument, "combo '" + std::string(name) + "' repeats a kind");
  return keep_order ? combo : sorted;
}

std::vector<Combo> enumerate_combos(std::span<const DescriptorKind> available) {
  std::string missing;
  for (DescriptorKind k : kAllKinds)
    if (std::find(available.begin(), available.end(), k) == available.end())
      missing += (missing.empty() ? "" : ", ") + std::string(kind_name(k));
  if (!missing.empty()) fail(ErrorCode::InvalidArgument, "missing descriptor kind(s): " + missing);

  std::vector<Combo> out;
  for (std::size_t a = 0; a < kAllKinds.size(); ++a)
    for (std::size_t b = a + 1; b < kAllKinds.size(); ++b)
      for (std::size_t c = b + 1; c < kAllKinds.size(); ++c) out.push_back({kAllKinds[a], kAllKinds[b], kAllKinds[c]});
  return out;
}

Raster FgaiImage::to_raster() const {
  Raster r{width, height, 3, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height * 3)};
  for (std::size_t i = 0; i < planes[0].size(); ++i)
    for (std::size_t ch = 0; ch < 3; ++ch) r.data[3 * i + ch] = planes[ch][i];
  return r;
}

std::vector<Combo> parse_combo_list(std::string_view list, bool keep_order) {
  if (list.empty() || list == "all") return enumerate_combos(kAllKinds);
  std::vector<Combo> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const std::size_t comma = std::min(list.find(',', pos), list.size());
    out.push_back(parse_combo(list.substr(pos, comma - pos), keep_order));
    pos = comma + 1;
  }
  return out;
}

FgaiImage fuse_ordered(const GaiImage& a, const GaiImage& b, const GaiImage& c) {
  const std::array<const GaiImage*, 3> src{&a, &b, &c};
  for (const GaiImage* g : src) {
    if (g->width() != a.width() || g->height() != a.height())
      fail(ErrorCode::InvalidArgument, "GAI sizes differ");
    if (g->mesh_id != a.mesh_id) fail(ErrorCode::InvalidArgument, "GAIs come from different scans");
  }
  if (a.kind == b.kind || b.kind == c.kind || a.kind == c.kind)
    fail(ErrorCode::InvalidArgument, "fusion needs three distinct kinds");

  FgaiImage out;
  out.width = a.width();
  out.height = a.height();
  out.mesh_id = a.mesh_id;
  out.step = a.step;
  out.coverage.assign(a.coverage.size(), 0);
  for (std::size_t i = 0; i < 3; ++i) {
    out.kinds[i] = src[i]->kind;
    out.planes[i] = src[i]->image.pixels;
    out.quantization[i] = src[i]->quantization;
    for (std::size_t p = 0; p < out.coverage.size() && p < src[i]->coverage.size(); ++p)
      out.coverage[p] |= src[i]->coverage[p];
  }
  out.name = combo_name(out.kinds);
  return out;
}

FgaiImage fuse(const GaiImage& a, const GaiImage& b, const GaiImage& c) {
  std::array<const GaiImage*, 3> src{&a, &b, &c};
  std::sort(src.begin(), src.end(), [](const GaiImage* x, const GaiImage* y) { return x->kind < y->kind; });
  return fuse_ordered(*src[0], *src[1], *src[2]);
}

namespace {

using Plane = std::vector<std::uint8_t>;

void flip_horizontal(Plane& p, int w, int h) {
  for (int r = 0; r < h; ++r) std::reverse(p.begin() + static_cast<std::ptrdiff_t>(r) * w,
                                           p.begin() + static_cast<std::ptrdiff_t>(r + 1) * w);
}

Plane rotate(const Plane& p, int w, int h, double degrees, std::uint8_t background) {
  const double rad = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(rad), sn = std::sin(rad);
  const double cx = w / 2.0, cy = h / 2.0;
  auto sample = [&](int r, int c) -> double {
    if (r < 0 || c < 0 || r >= h || c >= w) return background;
    return p[static_cast<std::size_t>(r) * w + c];
  };
  Plane out(p.size(), background);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      // Inverse mapping of the output pixel centre.
      const double dx = c + 0.5 - cx, dy = r + 0.5 - cy;
      const double sx = cs * dx + sn * dy + cx - 0.5;
      const double sy = -sn * dx + cs * dy + cy - 0.5;
      const int x0 = static_cast<int>(std::floor(sx)), y0 = static_cast<int>(std::floor(sy));
      if (x0 < -1 || y0 < -1 || x0 >= w || y0 >= h) continue;
      const double fx = sx - x0, fy = sy - y0;
      const double v = (1 - fy) * ((1 - fx) * sample(y0, x0) + fx * sample(y0, x0 + 1)) +
                       fy * ((1 - fx) * sample(y0 + 1, x0) + fx * sample(y0 + 1, x0 + 1));
      out[static_cast<std::size_t>(r) * w + c] = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
    }
  }
  return out;
}

void add_noise(Plane& p, double sigma, std::mt19937_64& rng) {
  constexpr double kScale = 1.0 / 4294967296.0;
  for (auto& px : p) {
    std::uint64_t sum = 0;
    for (int k = 0; k < 12; ++k) sum += rng() >> 32;
    const double z = (static_cast<double>(sum) - 6.0 * 4294967296.0) * kScale;
    px = static_cast<std::uint8_t>(std::clamp(std::floor(px + sigma * z + 0.5), 0.0, 255.0));
  }
}

void augment_planes(std::span<Plane> planes, int w, int h, std::uint8_t background, const AugmentSpec& spec) {
  require(spec.noise_sigma >= 0 && std::isfinite(spec.noise_sigma), "noise sigma must be >= 0");
  require(std::isfinite(spec.rotation_degrees), "rotation must be finite");
  std::mt19937_64 rng(spec.seed);
  for (Plane& p : planes) {
    if (spec.horizontal_flip) flip_horizontal(p, w, h);
    if (spec.rotation_degrees != 0.0) p = rotate(p, w, h, spec.rotation_degrees, background);
    if (spec.noise_sigma > 0.0) add_noise(p, spec.noise_sigma, rng);
  }
}

}  // namespace

FgaiImage augment(const FgaiImage& img, const AugmentSpec& spec) {
  FgaiImage out = img;
  augment_planes(out.planes, out.width, out.height, 0, spec);
  std::array<Plane, 1> cov{out.coverage};
  augment_planes(cov, out.width, out.height, 0, {spec.horizontal_flip, spec.rotation_degrees, 0.0, 0});
  out.coverage = std::move(cov[0]);
  return out;
}

GaiImage augment(const GaiImage& img, const AugmentSpec& spec) {
  GaiImage out = img;
  std::array<Plane, 1> planes{std::move(out.image.pixels)};
  augment_planes(planes, out.width(), out.height(), out.background, spec);
  out.image.pixels = std::move(planes[0]);
  std::array<Plane, 1> cov{out.coverage};
  augment_planes(cov, out.width(), out.height(), 0, {spec.horizontal_flip, spec.rotation_degrees, 0.0, 0});
  out.coverage = std::move(cov[0]);
  return out;
}

}  // namespace fgai
