#include "delaunay.hpp"

#include <algorithm>
#include <set>

#include "error.hpp"

namespace fgai {

__int128 orient2d(const LatticePoint& a, const LatticePoint& b, const LatticePoint& c) {
  const __int128 abx = b[0] - a[0], aby = b[1] - a[1];
  const __int128 acx = c[0] - a[0], acy = c[1] - a[1];
  return abx * acy - aby * acx;
}

int incircle_sos(const LatticePoint& a, std::size_t ia, const LatticePoint& b, std::size_t ib,
                 const LatticePoint& c, std::size_t ic, const LatticePoint& d, std::size_t id) {
  const __int128 adx = a[0] - d[0], ady = a[1] - d[1];
  const __int128 bdx = b[0] - d[0], bdy = b[1] - d[1];
  const __int128 cdx = c[0] - d[0], cdy = c[1] - d[1];
  const __int128 alift = adx * adx + ady * ady;
  const __int128 blift = bdx * bdx + bdy * bdy;
  const __int128 clift = cdx * cdx + cdy * cdy;
  const __int128 det = alift * (bdx * cdy - bdy * cdx) - blift * (adx * cdy - ady * cdx) +
                       clift * (adx * bdy - ady * bdx);
  if (det > 0) return 1;
  if (det < 0) return -1;

  // Coefficient of each point's lift perturbation in the determinant.
  struct Term {
    std::size_t index;
    __int128 coef;
  };
  std::array<Term, 4> terms{{{ia, orient2d(b, c, d)},
                             {ib, -orient2d(a, c, d)},
                             {ic, orient2d(a, b, d)},
                             {id, -orient2d(a, b, c)}}};
  std::sort(terms.begin(), terms.end(), [](const Term& x, const Term& y) { return x.index < y.index; });
  for (const Term& t : terms)
    if (t.coef != 0) return t.coef > 0 ? 1 : -1;
  fail(ErrorCode::Internal, "incircle on a degenerate triangle");
}

namespace {

constexpr std::int64_t kGhost = -1;
constexpr std::int32_t kNone = -1;

struct Tri {
  std::array<std::int64_t, 3> v;    // kGhost only ever in slot 2
  std::array<std::int32_t, 3> nbr;  // nbr[i] is across the edge opposite v[i]
  bool alive = true;

  bool ghost() const { return v[2] == kGhost; }
};

class Triangulator {
 public:
  explicit Triangulator(std::span<const LatticePoint> pts) : pts_(pts) {}

  std::vector<Facet> run() {
    const std::size_t n = pts_.size();
    if (n < 3) fail(ErrorCode::DegenerateGeometry, "Delaunay needs at least 3 points");
    std::size_t third = 2;
    while (third < n && orient2d(pts_[0], pts_[1], pts_[third]) == 0) ++third;
    if (third == n) fail(ErrorCode::DegenerateGeometry, "all points are collinear");
    seed(0, 1, third);
    for (std::size_t i = 2; i < n; ++i)
      if (i != third) insert(i);

    std::vector<Facet> out;
    for (const Tri& t : tris_)
      if (t.alive && !t.ghost())
        out.push_back({static_cast<std::uint32_t>(t.v[0]), static_cast<std::uint32_t>(t.v[1]),
                       static_cast<std::uint32_t>(t.v[2])});
    // Canonical order: rotate so the smallest index comes first, then sort.
    for (Facet& f : out) std::rotate(f.begin(), std::min_element(f.begin(), f.end()), f.end());
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  const LatticePoint& P(std::int64_t i) const { return pts_[static_cast<std::size_t>(i)]; }

  void seed(std::size_t a, std::size_t b, std::size_t c) {
    if (orient2d(pts_[a], pts_[b], pts_[c]) < 0) std::swap(b, c);
    const auto A = static_cast<std::int64_t>(a), B = static_cast<std::int64_t>(b), C = static_cast<std::int64_t>(c);
    // 0: real (A,B,C); 1: ghost (B,A); 2: ghost (C,B); 3: ghost (A,C)
    for (const Tri& t : {Tri{{A, B, C}, {2, 3, 1}}, Tri{{B, A, kGhost}, {3, 2, 0}},
                         Tri{{C, B, kGhost}, {1, 3, 0}}, Tri{{A, C, kGhost}, {2, 1, 0}}})
      allocate(t);
    last_ = 0;
  }

  bool in_conflict(const Tri& t, std::size_t p) const {
    const LatticePoint& q = pts_[p];
    if (t.ghost()) {
      const __int128 o = orient2d(P(t.v[0]), P(t.v[1]), q);
      if (o != 0) return o > 0;
      // On the hull line: conflicts only strictly inside the hull edge.
      const LatticePoint& u = P(t.v[0]);
      const LatticePoint& w = P(t.v[1]);
      const __int128 dot = static_cast<__int128>(q[0] - u[0]) * (w[0] - u[0]) +
                           static_cast<__int128>(q[1] - u[1]) * (w[1] - u[1]);
      const __int128 len2 = static_cast<__int128>(w[0] - u[0]) * (w[0] - u[0]) +
                            static_cast<__int128>(w[1] - u[1]) * (w[1] - u[1]);
      return dot > 0 && dot < len2;
    }
    return incircle_sos(P(t.v[0]), static_cast<std::size_t>(t.v[0]), P(t.v[1]), static_cast<std::size_t>(t.v[1]),
                        P(t.v[2]), static_cast<std::size_t>(t.v[2]), q, p) > 0;
  }

  // Visibility walk to a triangle in conflict with point p.
  std::int32_t locate(std::size_t p) const {
    std::int32_t cur = last_;
    if (!tris_[cur].alive) cur = first_alive();
    if (tris_[cur].ghost()) cur = tris_[cur].nbr[2];
    const LatticePoint& q = pts_[p];
    const std::size_t cap = 4 * tris_.size() + 16;
    for (std::size_t step = 0; step < cap; ++step) {
      const Tri& t = tris_[cur];
      bool moved = false;
      for (int k = 0; k < 3; ++k) {
        const int i = static_cast<int>((k + step) % 3);
        if (orient2d(P(t.v[(i + 1) % 3]), P(t.v[(i + 2) % 3]), q) < 0) {
          const std::int32_t next = t.nbr[i];
          if (tris_[next].ghost()) return next;
          cur = next;
          moved = true;
          break;
        }
      }
      if (!moved) return cur;
    }
    // Walk did not settle; fall back to a scan.
    for (std::size_t i = 0; i < tris_.size(); ++i)
      if (tris_[i].alive && in_conflict(tris_[i], p)) return static_cast<std::int32_t>(i);
    fail(ErrorCode::Internal, "Delaunay point location failed");
  }

  std::int32_t first_alive() const {
    for (std::size_t i = 0; i < tris_.size(); ++i)
      if (tris_[i].alive && !tris_[i].ghost()) return static_cast<std::int32_t>(i);
    fail(ErrorCode::Internal, "no live triangle");
  }

  void insert(std::size_t p) {
    const std::int32_t start = locate(p);
    if (!in_conflict(tris_[start], p)) fail(ErrorCode::Internal, "located triangle is not in conflict");

    cavity_.clear();
    stack_.assign(1, start);
    ++epoch_;
    visited_[start] = epoch_;
    while (!stack_.empty()) {
      const std::int32_t t = stack_.back();
      stack_.pop_back();
      cavity_.push_back(t);
      in_cavity_[t] = epoch_;
      for (std::int32_t nb : tris_[t].nbr) {
        if (visited_[nb] == epoch_) continue;
        visited_[nb] = epoch_;
        if (in_conflict(tris_[nb], p)) stack_.push_back(nb);
      }
    }

    boundary_.clear();
    for (std::int32_t t : cavity_) {
      const Tri& tri = tris_[t];
      for (int i = 0; i < 3; ++i) {
        const std::int32_t nb = tri.nbr[i];
        if (in_cavity_[nb] == epoch_) continue;
        boundary_.push_back({tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], nb, kNone});
      }
    }
    for (std::int32_t t : cavity_) {
      tris_[t].alive = false;
      free_.push_back(t);
    }

    const auto P64 = static_cast<std::int64_t>(p);
    for (auto& b : boundary_) {
      Tri nt;
      // Keep the ghost in slot 2; rotation preserves orientation.
      if (b.u == kGhost) nt.v = {b.w, P64, kGhost};
      else if (b.w == kGhost) nt.v = {P64, b.u, kGhost};
      else nt.v = {b.u, b.w, P64};
      nt.nbr = {kNone, kNone, kNone};
      const std::int32_t id = allocate(nt);
      b.created = id;
      // Link across the boundary edge.
      Tri& created = tris_[id];
      for (int i = 0; i < 3; ++i) {
        const auto x = created.v[(i + 1) % 3], y = created.v[(i + 2) % 3];
        if ((x == b.u && y == b.w)) created.nbr[i] = b.outside;
      }
      Tri& out = tris_[b.outside];
      for (int i = 0; i < 3; ++i) {
        const auto x = out.v[(i + 1) % 3], y = out.v[(i + 2) % 3];
        if (x == b.w && y == b.u) out.nbr[i] = id;
      }
    }
    // Link new triangles to each other via their edges incident to p.
    for (std::size_t a = 0; a < boundary_.size(); ++a) {
      Tri& ta = tris_[boundary_[a].created];
      for (int i = 0; i < 3; ++i) {
        if (ta.nbr[i] != kNone) continue;
        const auto x = ta.v[(i + 1) % 3], y = ta.v[(i + 2) % 3];
        for (std::size_t c = 0; c < boundary_.size(); ++c) {
          if (c == a) continue;
          const Tri& tc = tris_[boundary_[c].created];
          for (int j = 0; j < 3; ++j) {
            if (tc.v[(j + 1) % 3] == y && tc.v[(j + 2) % 3] == x) {
              ta.nbr[i] = boundary_[c].created;
              break;
            }
          }
          if (ta.nbr[i] != kNone) break;
        }
        if (ta.nbr[i] == kNone) fail(ErrorCode::Internal, "Delaunay cavity is not closed");
      }
    }
    last_ = boundary_.front().created;
  }

  std::int32_t allocate(const Tri& t) {
    if (!free_.empty()) {
      const std::int32_t id = free_.back();
      free_.pop_back();
      tris_[id] = t;
      return id;
    }
    tris_.push_back(t);
    visited_.push_back(0);
    in_cavity_.push_back(0);
    return static_cast<std::int32_t>(tris_.size() - 1);
  }

  std::span<const LatticePoint> pts_;
  std::vector<Tri> tris_;
  std::vector<std::int32_t> free_;
  std::vector<std::int32_t> cavity_, stack_;
  std::vector<std::uint64_t> visited_, in_cavity_;
  std::uint64_t epoch_ = 0;
  std::int32_t last_ = 0;
  struct BoundaryEdge {
    std::int64_t u, w;
    std::int32_t outside;
    std::int32_t created;
  };
  std::vector<BoundaryEdge> boundary_;
};

}  // namespace

std::vector<Facet> delaunay_triangulate(std::span<const LatticePoint> points) {
  {
    std::vector<LatticePoint> sorted(points.begin(), points.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      fail(ErrorCode::InvalidArgument, "Delaunay input contains duplicate points");
  }
  return Triangulator(points).run();
}

}  // namespace fgai
