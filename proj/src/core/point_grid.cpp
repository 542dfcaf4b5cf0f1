#include "point_grid.hpp"

#include <cmath>
#include <limits>

#include "error.hpp"

namespace fgai {

PointGrid::PointGrid(std::span<const Vec3> points, std::span<const std::uint32_t> subset, double cell_size)
    : points_(points), cell_(cell_size) {
  require(cell_size > 0 && std::isfinite(cell_size), "PointGrid cell size must be positive");
  auto add = [&](std::uint32_t i) {
    const Key k = key_of(points_[i]);
    if (cells_.empty()) lo_ = hi_ = k;
    for (int d = 0; d < 3; ++d) {
      lo_[d] = std::min(lo_[d], k[d]);
      hi_[d] = std::max(hi_[d], k[d]);
    }
    cells_[k].push_back(i);
  };
  if (subset.empty()) {
    for (std::uint32_t i = 0; i < points_.size(); ++i) add(i);
  } else {
    for (std::uint32_t i : subset) add(i);
  }
  require(!cells_.empty(), "PointGrid needs at least one point");
}

PointGrid::Key PointGrid::key_of(const Vec3& p) const {
  return {static_cast<std::int64_t>(std::floor(p.x() / cell_)), static_cast<std::int64_t>(std::floor(p.y() / cell_)),
          static_cast<std::int64_t>(std::floor(p.z() / cell_))};
}

std::uint32_t PointGrid::nearest(const Vec3& query) const {
  const Key c = key_of(query);
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t best_index = std::numeric_limits<std::uint32_t>::max();
  std::int64_t max_ring = 0;
  for (int d = 0; d < 3; ++d)
    max_ring = std::max({max_ring, std::abs(c[d] - lo_[d]), std::abs(hi_[d] - c[d])});

  for (std::int64_t ring = 0; ring <= max_ring; ++ring) {
    // Every point in ring r is at least (r - 1) * cell away.
    if (ring > 0) {
      const double bound = static_cast<double>(ring - 1) * cell_;
      if (bound * bound > best) break;
    }
    for (std::int64_t dx = -ring; dx <= ring; ++dx)
      for (std::int64_t dy = -ring; dy <= ring; ++dy)
        for (std::int64_t dz = -ring; dz <= ring; ++dz) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
          const auto it = cells_.find({c[0] + dx, c[1] + dy, c[2] + dz});
          if (it == cells_.end()) continue;
          for (std::uint32_t i : it->second) {
            const double d2 = (points_[i] - query).squaredNorm();
            if (d2 < best || (d2 == best && i < best_index)) {
              best = d2;
              best_index = i;
            }
          }
        }
  }
  return best_index;
}

}  // namespace fgai
