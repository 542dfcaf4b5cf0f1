#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "descriptors.hpp"
#include "image.hpp"
#include "mesh_io.hpp"
#include "resample.hpp"

namespace fgai {

struct ImageSize {
  int width = 240;
  int height = 240;
};

/// Affine 8-bit quantization: clamp to [lo, hi], map to [0, 255], round half
/// up. lo == hi maps everything to 128.
struct Quantization {
  double lo = 0.0;
  double hi = 0.0;

  bool constant() const { return !(hi > lo); }
  std::uint8_t quantize(double v) const;
  /// Inverse of quantize for values inside [lo, hi] (within one step).
  double dequantize(std::uint8_t byte) const;
};

/// Percentile with linear interpolation between order statistics.
double percentile(std::vector<double> values, double p);

/// p1/p99 clamp range of the finite values.
Quantization fit_quantization(std::span<const double> values);

struct ByteMapping {
  Quantization params;
  bool normalized = true;  ///< false for GL, which is already 0..255
  std::vector<std::uint8_t> bytes;
};

ByteMapping normalize_to_bytes(std::span<const double> values, DescriptorKind kind);

/// Real-valued raster before quantization.
struct FieldRaster {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> coverage;

  std::vector<double> covered_values() const;
};

struct GaiImage {
  DescriptorKind kind = DescriptorKind::K;
  GrayImage image;
  std::vector<std::uint8_t> coverage;
  std::uint8_t background = 0;
  // provenance
  std::string mesh_id;
  double step = 1.0;
  Quantization quantization;
  bool normalized = false;
  std::string normalization_mode = "image";

  int width() const { return image.width; }
  int height() const { return image.height; }
};

/// Scales the texture map's pixel coordinates to `size` and calls `visit(facet,
/// pixel, barycentrics)` for every pixel centre inside each facet (closed
/// triangles, facets in ascending order, zero-area triangles skipped).
template <typename Visit>
void scan_facets(const TextureMap& tmap, ImageSize size, Visit&& visit);

FieldRaster rasterize_values(const ResampledMesh& resampled, const TextureMap& tmap, const DescriptorField& field,
                             ImageSize size);

/// Quantizes a raster; with `fixed` unset the p1/p99 range of this image is used.
GaiImage quantize_raster(const FieldRaster& raster, DescriptorKind kind, const std::optional<Quantization>& fixed = {});

GaiImage rasterize_field(const ResampledMesh& resampled, const TextureMap& tmap, const DescriptorField& field,
                         ImageSize size, const std::optional<Quantization>& fixed = {});

/// Mean gray level of the original texture inside one mapped facet.
std::uint8_t facet_mean_gray(const GrayImage& texture, const std::array<Vec2, 3>& pixels);

/// Flat-filled gray tessellation: every resampled facet painted with the mean
/// texture gray inside its mapped triangle, rasterized at `size`.
GaiImage tessellated_gray(const TexturedMesh& original, const ResampledMesh& resampled, const TextureMap& tmap,
                          ImageSize size);

// ---------------------------------------------------------------------------

namespace detail {
inline double edge(const Vec2& a, const Vec2& b, const Vec2& p) {
  return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}
}  // namespace detail

template <typename Visit>
void scan_triangle(const std::array<Vec2, 3>& t, int width, int height, Visit&& visit) {
  const double area = detail::edge(t[0], t[1], t[2]);
  if (area == 0.0 || !std::isfinite(area)) return;
  const double xmin = std::min({t[0].x(), t[1].x(), t[2].x()}), xmax = std::max({t[0].x(), t[1].x(), t[2].x()});
  const double ymin = std::min({t[0].y(), t[1].y(), t[2].y()}), ymax = std::max({t[0].y(), t[1].y(), t[2].y()});
  const int c0 = std::max(0, static_cast<int>(std::ceil(xmin - 0.5)));
  const int c1 = std::min(width - 1, static_cast<int>(std::floor(xmax - 0.5)));
  const int r0 = std::max(0, static_cast<int>(std::ceil(ymin - 0.5)));
  const int r1 = std::min(height - 1, static_cast<int>(std::floor(ymax - 0.5)));
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      const Vec2 p(c + 0.5, r + 0.5);
      const double w0 = detail::edge(t[1], t[2], p) / area;
      const double w1 = detail::edge(t[2], t[0], p) / area;
      const double w2 = detail::edge(t[0], t[1], p) / area;
      if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
      visit(r, c, std::array<double, 3>{w0, w1, w2});
    }
  }
}

template <typename Visit>
void scan_facets(const TextureMap& tmap, ImageSize size, Visit&& visit) {
  const double sx = static_cast<double>(size.width) / tmap.texture_width;
  const double sy = static_cast<double>(size.height) / tmap.texture_height;
  for (std::size_t f = 0; f < tmap.facet_pixels.size(); ++f) {
    std::array<Vec2, 3> t;
    for (int i = 0; i < 3; ++i) t[i] = {tmap.facet_pixels[f][i].x() * sx, tmap.facet_pixels[f][i].y() * sy};
    scan_triangle(t, size.width, size.height,
                  [&](int r, int c, const std::array<double, 3>& bary) { visit(f, r, c, bary); });
  }
}

}  // namespace fgai
