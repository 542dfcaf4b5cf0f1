#include "gai.hpp"

#include <cmath>
#include <limits>

#include "error.hpp"

namespace fgai {

std::uint8_t Quantization::quantize(double v) const {
  if (constant()) return 128;
  const double t = (std::clamp(v, lo, hi) - lo) / (hi - lo);
  return static_cast<std::uint8_t>(std::min(255.0, std::floor(t * 255.0 + 0.5)));
}

double Quantization::dequantize(std::uint8_t byte) const {
  if (constant()) return lo;
  return lo + (hi - lo) * (static_cast<double>(byte) / 255.0);
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) fail(ErrorCode::InvalidArgument, "percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Quantization fit_quantization(std::span<const double> values) {
  std::vector<double> finite;
  finite.reserve(values.size());
  for (double v : values)
    if (std::isfinite(v)) finite.push_back(v);
  if (finite.empty()) fail(ErrorCode::InvalidArgument, "normalization needs at least one finite value");
  std::sort(finite.begin(), finite.end());
  Quantization q{percentile(finite, 1.0), percentile(finite, 99.0)};
  // A spread at the level of rounding noise is a constant field.
  const double magnitude = std::max(std::abs(q.lo), std::abs(q.hi));
  if (q.hi - q.lo <= 64.0 * std::numeric_limits<double>::epsilon() * magnitude) q.hi = q.lo;
  return q;
}

ByteMapping normalize_to_bytes(std::span<const double> values, DescriptorKind kind) {
  ByteMapping m;
  m.bytes.reserve(values.size());
  if (kind == DescriptorKind::GL) {
    m.normalized = false;
    m.params = {0.0, 255.0};
    for (double v : values) m.bytes.push_back(static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0)));
    return m;
  }
  m.params = fit_quantization(values);
  for (double v : values) m.bytes.push_back(m.params.quantize(v));
  return m;
}

std::vector<double> FieldRaster::covered_values() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (coverage[i]) out.push_back(values[i]);
  return out;
}

FieldRaster rasterize_values(const ResampledMesh& resampled, const TextureMap& tmap, const DescriptorField& field,
                             ImageSize size) {
  if (tmap.empty()) fail(ErrorCode::InvalidArgument, "empty texture map");
  require(size.width > 0 && size.height > 0, "image size must be positive");
  if (field.values.size() != resampled.mesh.vertices.size() || tmap.facet_pixels.size() != resampled.mesh.facets.size())
    fail(ErrorCode::InvalidArgument, "field, texture map and resampled mesh disagree in size");

  FieldRaster raster{size.width, size.height, std::vector<double>(static_cast<std::size_t>(size.width) * size.height, 0.0),
                     std::vector<std::uint8_t>(static_cast<std::size_t>(size.width) * size.height, 0)};
  std::size_t usable = 0;
  std::vector<char> facet_ok(resampled.mesh.facets.size(), 0);
  for (std::size_t f = 0; f < facet_ok.size(); ++f) {
    const Facet& fv = resampled.mesh.facets[f];
    facet_ok[f] = field.valid[fv[0]] && field.valid[fv[1]] && field.valid[fv[2]];
    usable += static_cast<std::size_t>(facet_ok[f]);
  }
  if (usable == 0) fail(ErrorCode::InvalidArgument, "every facet has an invalid descriptor vertex");

  scan_facets(tmap, size, [&](std::size_t f, int r, int c, const std::array<double, 3>& w) {
    if (!facet_ok[f]) return;
    const Facet& fv = resampled.mesh.facets[f];
    const std::size_t idx = static_cast<std::size_t>(r) * size.width + c;
    const double va = field.values[fv[0]], vb = field.values[fv[1]], vc = field.values[fv[2]];
    raster.values[idx] = va == vb && vb == vc ? va : w[0] * va + w[1] * vb + w[2] * vc;
    raster.coverage[idx] = 1;
  });
  return raster;
}

GaiImage quantize_raster(const FieldRaster& raster, DescriptorKind kind, const std::optional<Quantization>& fixed) {
  GaiImage gai;
  gai.kind = kind;
  gai.image = GrayImage(raster.width, raster.height, gai.background);
  gai.coverage = raster.coverage;
  const auto covered = raster.covered_values();
  if (covered.empty()) fail(ErrorCode::InvalidArgument, "rasterization covered no pixel");

  if (kind == DescriptorKind::GL) {
    gai.normalized = false;
    gai.quantization = {0.0, 255.0};
    gai.normalization_mode = "none";
  } else {
    gai.normalized = true;
    gai.quantization = fixed ? *fixed : fit_quantization(covered);
    gai.normalization_mode = fixed ? "global" : "image";
  }
  for (std::size_t i = 0; i < raster.values.size(); ++i) {
    if (!raster.coverage[i]) continue;
    gai.image.pixels[i] = gai.normalized
                              ? gai.quantization.quantize(raster.values[i])
                              : static_cast<std::uint8_t>(std::clamp(std::floor(raster.values[i] + 0.5), 0.0, 255.0));
  }
  return gai;
}

GaiImage rasterize_field(const ResampledMesh& resampled, const TextureMap& tmap, const DescriptorField& field,
                         ImageSize size, const std::optional<Quantization>& fixed) {
  return quantize_raster(rasterize_values(resampled, tmap, field, size), field.kind, fixed);
}

std::uint8_t facet_mean_gray(const GrayImage& texture, const std::array<Vec2, 3>& pixels) {
  std::uint64_t sum = 0, count = 0;
  scan_triangle(pixels, texture.width, texture.height, [&](int r, int c, const std::array<double, 3>&) {
    sum += texture.at(r, c);
    ++count;
  });
  if (count == 0) {
    // No pixel centre inside: use the pixels under the three corners.
    for (const Vec2& p : pixels) {
      const int c = std::clamp(static_cast<int>(std::floor(p.x())), 0, texture.width - 1);
      const int r = std::clamp(static_cast<int>(std::floor(p.y())), 0, texture.height - 1);
      sum += texture.at(r, c);
    }
    count = 3;
  }
  return static_cast<std::uint8_t>((sum + count / 2) / count);
}

GaiImage tessellated_gray(const TexturedMesh& original, const ResampledMesh& resampled, const TextureMap& tmap,
                          ImageSize size) {
  if (original.texture.empty()) fail(ErrorCode::InvalidArgument, "mesh has no texture");
  if (tmap.empty()) fail(ErrorCode::InvalidArgument, "empty texture map");
  require(size.width > 0 && size.height > 0, "image size must be positive");
  if (tmap.facet_pixels.size() != resampled.mesh.facets.size())
    fail(ErrorCode::InvalidArgument, "texture map does not belong to the resampled mesh");

  std::vector<std::uint8_t> fill(tmap.facet_pixels.size());
  for (std::size_t f = 0; f < fill.size(); ++f) fill[f] = facet_mean_gray(original.texture, tmap.facet_pixels[f]);

  FieldRaster raster{size.width, size.height, std::vector<double>(static_cast<std::size_t>(size.width) * size.height, 0.0),
                     std::vector<std::uint8_t>(static_cast<std::size_t>(size.width) * size.height, 0)};
  scan_facets(tmap, size, [&](std::size_t f, int r, int c, const std::array<double, 3>&) {
    const std::size_t idx = static_cast<std::size_t>(r) * size.width + c;
    raster.values[idx] = fill[f];
    raster.coverage[idx] = 1;
  });
  return quantize_raster(raster, DescriptorKind::GL);
}

}  // namespace fgai
