#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace fgai {

/// 8-bit single channel image, row-major, row 0 at the top.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  bool empty() const { return pixels.empty(); }
  std::uint8_t at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
  std::uint8_t& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * width + col]; }
};

/// Interleaved 8-bit raster with 1 or 3 channels.
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;
};

/// Integer-rounded Rec.601 luma.
inline std::uint8_t rgb_to_gray(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) / 1000u);
}

GrayImage to_gray(const Raster& raster);

/// Decodes PNG or JPEG (detected from the file signature). Alpha is dropped,
/// 16-bit samples are reduced to 8 bits, palettes are expanded.
Raster read_raster(const std::filesystem::path& path);
GrayImage read_gray(const std::filesystem::path& path);

/// Deterministic PNG encoding (fixed zlib level, no ancillary chunks).
void write_png(const std::filesystem::path& path, const Raster& raster);
void write_png(const std::filesystem::path& path, const GrayImage& image);

}  // namespace fgai
