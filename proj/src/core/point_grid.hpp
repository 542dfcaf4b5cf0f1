#pragma once

#include <span>
#include <unordered_map>

#include "geometry.hpp"

namespace fgai {

/// Uniform 3D bucket grid for exact nearest-neighbour queries.
class PointGrid {
 public:
  /// Indexes points[i] for every i in `subset` (all points if empty).
  PointGrid(std::span<const Vec3> points, std::span<const std::uint32_t> subset, double cell_size);

  /// Index of the closest indexed point; ties go to the lowest index.
  std::uint32_t nearest(const Vec3& query) const;

 private:
  using Key = std::array<std::int64_t, 3>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      return static_cast<std::size_t>(k[0] * 73856093LL ^ k[1] * 19349663LL ^ k[2] * 83492791LL);
    }
  };

  Key key_of(const Vec3& p) const;

  std::span<const Vec3> points_;
  double cell_;
  Key lo_{}, hi_{};
  std::unordered_map<Key, std::vector<std::uint32_t>, KeyHash> cells_;
};

}  // namespace fgai
