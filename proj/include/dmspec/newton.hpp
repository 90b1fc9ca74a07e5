#pragma once

#include "dmspec/addpoly.hpp"
#include "dmspec/rational.hpp"

#include <algorithm>
#include <map>
#include <utility>
#include <vector>

namespace dmspec {

/// Lower convex hull of the points (q^i, v(g_i)) of a T-operator, anchored at
/// (1, v(T)) = (1, -1). Vertices are break points only: strictly increasing x,
/// strictly increasing slopes, no collinear interior points.
struct NewtonPolygon {
  std::vector<std::pair<BigInt, Rational>> vertices;
  bool operator==(const NewtonPolygon&) const = default;
};

/// Root sizes read off a polygon: (log_size, count) with strictly decreasing
/// log_size; counts total q^r - 1.
struct RootSizeMultiset {
  std::vector<std::pair<Rational, BigInt>> entries;
  bool operator==(const RootSizeMultiset&) const = default;

  BigInt total_count() const {
    BigInt n = 0;
    for (const auto& [s, c] : entries) n += c;
    return n;
  }
};

namespace npdetail {

/// slope(a->b) < slope(b->c), as an exact cross-product comparison.
inline bool strictly_convex(const std::pair<BigInt, Rational>& a,
                            const std::pair<BigInt, Rational>& b,
                            const std::pair<BigInt, Rational>& c) {
  const Rational lhs = (b.second - a.second) * Rational(c.first - b.first);
  const Rational rhs = (c.second - b.second) * Rational(b.first - a.first);
  return lhs < rhs;
}

}  // namespace npdetail

/// Lower hull of {(q^i, v(g_i)) : g_i != 0} for a valid T-operator.
/// Coefficients that are zero at their precision count as absent.
inline NewtonPolygon np_from_addpoly(const AddPoly& f) {
  const PSeries* c0 = f.coeff(0);
  if (c0 == nullptr || c0->val() != Valuation(Rational(-1)))
    throw Error("newton polygon needs a T-operator (index-0 coefficient T)");
  std::vector<std::pair<BigInt, Rational>> pts;
  for (const auto& [i, g] : f.coeffs()) {
    if (g.is_zero_at_precision()) continue;
    pts.emplace_back(int_pow(f.q(), i), g.val().finite());
  }
  // monotone chain; x-coordinates are already strictly increasing
  std::vector<std::pair<BigInt, Rational>> hull;
  for (const auto& pt : pts) {
    while (hull.size() >= 2 && !npdetail::strictly_convex(hull[hull.size() - 2], hull.back(), pt))
      hull.pop_back();
    hull.push_back(pt);
  }
  return NewtonPolygon{std::move(hull)};
}

/// Edge slopes and lengths as a root-size multiset: an edge of slope s and
/// horizontal length l carries l roots of log-size s (valuation -s).
inline RootSizeMultiset np_root_valuations(const NewtonPolygon& np) {
  if (np.vertices.size() < 2) return RootSizeMultiset{};
  RootSizeMultiset ms;
  for (size_t k = np.vertices.size() - 1; k-- > 0;) {
    const auto& [x0, y0] = np.vertices[k];
    const auto& [x1, y1] = np.vertices[k + 1];
    const Rational slope = (y1 - y0) / Rational(x1 - x0);
    ms.entries.emplace_back(slope, x1 - x0);
  }
  return ms;
}

/// Rebuilds the polygon with the given edge slopes and lengths, anchored at
/// (1, -1). Equal slopes merge; each merged run must end at a q-power.
inline NewtonPolygon np_from_rootsizes(const RootSizeMultiset& ms, unsigned q, unsigned r) {
  std::map<Rational, BigInt> groups;
  for (const auto& [s, c] : ms.entries) {
    if (c <= 0) throw Error("root-size counts must be positive");
    groups[s] += c;
  }
  BigInt total = 0;
  for (const auto& [s, c] : groups) total += c;
  if (total != int_pow(q, r) - 1)
    throw Error("root-size counts do not sum to q^r - 1");

  NewtonPolygon np;
  BigInt x = 1;
  Rational y(-1);
  np.vertices.emplace_back(x, y);
  BigInt next_power = q;
  for (const auto& [slope, count] : groups) {
    x += count;
    y += slope * Rational(count);
    while (next_power < x) next_power *= q;
    if (x != next_power)
      throw Error("counts not partitionable into q-power runs");
    np.vertices.emplace_back(x, y);
  }
  return np;
}

}  // namespace dmspec
