#pragma once

#include <string>
#include <string_view>

#include "gai.hpp"

namespace fgai {

using Combo = std::array<DescriptorKind, 3>;

/// "K-H-GL" style name, kinds joined in the given order.
std::string combo_name(const Combo& combo);
/// Accepts kinds in any order; canonicalizes unless `keep_order`.
Combo parse_combo(std::string_view name, bool keep_order = false);
Combo canonical(Combo combo);
/// Comma-separated combo names; "all" or an empty string gives the ten.
std::vector<Combo> parse_combo_list(std::string_view list, bool keep_order = false);

/// The ten 3-subsets of {K, H, GL, LD, SI}, kinds in canonical order, list in
/// lexicographic order. Throws InvalidArgument naming any missing kind.
std::vector<Combo> enumerate_combos(std::span<const DescriptorKind> available);

struct FgaiImage {
  Combo kinds{};
  std::string name;
  int width = 0;
  int height = 0;
  std::array<std::vector<std::uint8_t>, 3> planes;
  std::vector<std::uint8_t> coverage;
  std::string mesh_id;
  double step = 1.0;
  std::array<Quantization, 3> quantization{};

  Raster to_raster() const;
  GrayImage channel(int i) const {
    GrayImage g(width, height);
    g.pixels = planes[static_cast<std::size_t>(i)];
    return g;
  }
};

/// Stacks three GAIs of one scan with channels in canonical kind order,
/// whatever the argument order.
FgaiImage fuse(const GaiImage& a, const GaiImage& b, const GaiImage& c);
/// Same, but keeps the argument order (explicit channel permutations).
FgaiImage fuse_ordered(const GaiImage& a, const GaiImage& b, const GaiImage& c);

struct AugmentSpec {
  bool horizontal_flip = false;
  double rotation_degrees = 0.0;
  double noise_sigma = 0.0;  ///< in 8-bit gray levels
  std::uint64_t seed = 0;
};

/// Flip, rotate about the image centre (bilinear, background fill), then add
/// seeded approximately-Gaussian noise (Irwin-Hall sum of 12 uniforms; integer
/// generator, no transcendental calls) and clamp to [0, 255].
FgaiImage augment(const FgaiImage& img, const AugmentSpec& spec);
GaiImage augment(const GaiImage& img, const AugmentSpec& spec);

}  // namespace fgai
