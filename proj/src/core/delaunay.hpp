#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "geometry.hpp"

namespace fgai {

using LatticePoint = std::array<std::int64_t, 2>;

/// Exact orientation of (a, b, c): > 0 counter-clockwise, < 0 clockwise.
__int128 orient2d(const LatticePoint& a, const LatticePoint& b, const LatticePoint& c);

/// In-circle test with symbolic perturbation: returns +1 when `d` lies inside
/// the circumcircle of counter-clockwise (a, b, c), -1 outside. Exact ties are
/// resolved by lifting each point by an infinitesimal that decreases with its
/// index, so the result never is 0 for a non-degenerate triangle.
int incircle_sos(const LatticePoint& a, std::size_t ia, const LatticePoint& b, std::size_t ib,
                 const LatticePoint& c, std::size_t ic, const LatticePoint& d, std::size_t id);

/// Delaunay triangulation of distinct integer points (Bowyer-Watson with a
/// ghost vertex, so the result always covers the convex hull). Triangles are
/// counter-clockwise. Throws DegenerateGeometry when all points are collinear.
std::vector<Facet> delaunay_triangulate(std::span<const LatticePoint> points);

}  // namespace fgai
