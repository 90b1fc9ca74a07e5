#pragma once

#include "dmspec/addpoly.hpp"
#include "dmspec/newton.hpp"
#include "dmspec/spectral.hpp"
#include "dmspec/tower.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dmspec {

struct OracleConfig {
  Rational precision = Rational(64);
  unsigned depth = 3;
  long e_max = PSeries::kDefaultEMax;
};

namespace odetail {

struct FpSolution {
  std::vector<unsigned> particular;
  std::vector<std::vector<unsigned>> nullspace;
};

/// Gauss-Jordan over F_p for A z = b (row-major); nullopt when inconsistent.
inline std::optional<FpSolution> solve_fp(unsigned p, std::vector<std::vector<unsigned>> A,
                                          std::vector<unsigned> b) {
  using namespace ffdetail;
  const size_t rows = A.size();
  const size_t cols = rows == 0 ? 0 : A[0].size();
  std::vector<int> pivot_col;
  size_t rank = 0;
  for (size_t c = 0; c < cols && rank < rows; ++c) {
    size_t sel = rank;
    while (sel < rows && A[sel][c] == 0) ++sel;
    if (sel == rows) continue;
    std::swap(A[sel], A[rank]);
    std::swap(b[sel], b[rank]);
    const unsigned inv = invm(A[rank][c], p);
    for (size_t j = c; j < cols; ++j) A[rank][j] = mulm(A[rank][j], inv, p);
    b[rank] = mulm(b[rank], inv, p);
    for (size_t i = 0; i < rows; ++i) {
      if (i == rank || A[i][c] == 0) continue;
      const unsigned f = A[i][c];
      for (size_t j = c; j < cols; ++j) A[i][j] = subm(A[i][j], mulm(f, A[rank][j], p), p);
      b[i] = subm(b[i], mulm(f, b[rank], p), p);
    }
    pivot_col.push_back(static_cast<int>(c));
    ++rank;
  }
  for (size_t i = rank; i < rows; ++i)
    if (b[i] != 0) return std::nullopt;
  FpSolution sol;
  sol.particular.assign(cols, 0);
  std::vector<bool> is_pivot(cols, false);
  for (size_t r = 0; r < rank; ++r) {
    sol.particular[pivot_col[r]] = b[r];
    is_pivot[pivot_col[r]] = true;
  }
  for (size_t c = 0; c < cols; ++c) {
    if (is_pivot[c]) continue;
    std::vector<unsigned> v(cols, 0);
    v[c] = 1;
    for (size_t r = 0; r < rank; ++r) v[pivot_col[r]] = subm(0, A[r][c], p);
    sol.nullspace.push_back(std::move(v));
  }
  return sol;
}

/// Re-expresses x (known to have degree dividing d) in F_{p^d}.
inline FFElem descend(FieldTower& tw, const FFElem& x, unsigned d) {
  if (x.degree() == d) return x;
  const unsigned M = x.degree();
  const unsigned p = tw.p();
  std::vector<std::vector<unsigned>> A(M, std::vector<unsigned>(d, 0));
  FFElem basis = tw.one(M);
  const FFElem img_gen = tw.embed(tw.gen(d), M);
  for (unsigned j = 0; j < d; ++j) {
    for (unsigned i = 0; i < M; ++i) A[i][j] = basis.coords()[i];
    basis = basis * img_gen;
  }
  auto sol = solve_fp(p, std::move(A), x.coords());
  if (!sol) throw Error("descend: element not in requested subfield");
  return tw.from_coords(d, sol->particular);
}

}  // namespace odetail

/// All solutions of sum_i c_i x^(q^i) = rhs, in the smallest tower field
/// containing them. Solving is F_p-linear algebra after flattening; the
/// field is enlarged by the minimal factor until the full solution set
/// (q^(i_top - i_min) elements over the closure) is present.
inline std::vector<FFElem> residual_solve(FieldTower& tw, const std::map<unsigned, FFElem>& f,
                                          unsigned q, const FFElem& rhs) {
  std::map<unsigned, FFElem> g;
  for (const auto& [i, c] : f)
    if (!c.is_zero()) g.emplace(i, c);
  if (g.empty()) throw Error("residual_solve: zero additive polynomial");
  const auto [p, e] = AddPoly::factor_prime_power(q);
  if (p != tw.p()) throw Error("residual_solve: tower characteristic mismatch");
  const unsigned i_min = g.begin()->first;
  const unsigned i_top = g.rbegin()->first;
  const BigInt expect = int_pow(q, i_top - i_min);

  unsigned base = rhs.degree();
  for (const auto& [i, c] : g) base = static_cast<unsigned>(std::lcm(base, c.degree()));

  for (unsigned k = 1;; ++k) {
    const unsigned M = base * k;
    if (int_pow(p, M) > tw.field_cap())
      throw Error("residual solve needs a field beyond the configured cap (degree " +
                  std::to_string(M) + ")");
    std::map<unsigned, FFElem> gM;
    for (const auto& [i, c] : g) gM.emplace(i, tw.embed(c, M));
    const FFElem rhsM = tw.embed(rhs, M);

    std::vector<std::vector<unsigned>> A(M, std::vector<unsigned>(M, 0));
    FFElem bj = tw.one(M);
    const FFElem gen = tw.gen(M);
    for (unsigned j = 0; j < M; ++j) {
      FFElem img = tw.zero(M);
      FFElem pw = bj;  // bj^(q^i), advanced along i
      unsigned cur = 0;
      for (const auto& [i, c] : gM) {
        for (; cur < i; ++cur)
          for (unsigned t = 0; t < e; ++t) pw = pw.frobenius();
        img = img + c * pw;
      }
      for (unsigned i = 0; i < M; ++i) A[i][j] = img.coords()[i];
      bj = bj * gen;
    }
    auto sol = odetail::solve_fp(p, std::move(A), rhsM.coords());
    if (sol && int_pow(p, static_cast<unsigned>(sol->nullspace.size())) == expect) {
      std::vector<FFElem> out;
      const size_t n = sol->nullspace.size();
      std::vector<unsigned> t(n, 0);
      for (;;) {
        std::vector<unsigned> coords = sol->particular;
        for (size_t i = 0; i < n; ++i)
          if (t[i] != 0)
            for (unsigned j = 0; j < M; ++j)
              coords[j] = ffdetail::addm(coords[j], ffdetail::mulm(t[i], sol->nullspace[i][j], p), p);
        out.push_back(tw.from_coords(M, coords));
        size_t i = 0;
        while (i < n && ++t[i] == p) t[i++] = 0;
        if (i == n) break;
      }
      unsigned dmin = 1;
      for (const FFElem& x : out) dmin = static_cast<unsigned>(std::lcm(dmin, tw.degree_over(x, 1)));
      if (dmin < M)
        for (FFElem& x : out) x = odetail::descend(tw, x, dmin);
      std::sort(out.begin(), out.end(), [](const FFElem& a, const FFElem& b) { return lex_less(a, b); });
      return out;
    }
  }
}

namespace odetail {

inline std::vector<std::pair<BigInt, Rational>> lower_hull(
    std::vector<std::pair<BigInt, Rational>> pts) {
  std::vector<std::pair<BigInt, Rational>> hull;
  for (const auto& pt : pts) {
    while (hull.size() >= 2 && !npdetail::strictly_convex(hull[hull.size() - 2], hull.back(), pt))
      hull.pop_back();
    hull.push_back(pt);
  }
  return hull;
}

/// Largest valuation among the nonzero kernel elements of f: the negated
/// slope of the first edge of NP(f).
inline Rational kernel_top_valuation(const AddPoly& f) {
  std::vector<std::pair<BigInt, Rational>> pts;
  for (const auto& [i, g] : f.coeffs()) {
    if (g.is_zero_at_precision()) continue;
    pts.emplace_back(int_pow(f.q(), i), g.val().finite());
  }
  auto hull = lower_hull(std::move(pts));
  if (hull.size() < 2) throw Error("additive polynomial has a single term; no nonzero kernel");
  const Rational slope =
      (hull[1].second - hull[0].second) / Rational(hull[1].first - hull[0].first);
  return -slope;
}

}  // namespace odetail

/// All x with f(x) = rhs and val(x) > min_val (no constraint when nullopt),
/// as series with honestly tracked precision. Classic Newton-polygon
/// lifting: pick an edge, solve the residual additive equation for the
/// leading coefficient, subtract, recurse on the residual right-hand side.
inline std::vector<PSeries> additive_solve(FieldTower& tw, const AddPoly& f, const PSeries& rhs,
                                           std::optional<Rational> min_val, const Rational& prec,
                                           long e_max, unsigned depth_guard = 0) {
  if (depth_guard > 20000) throw Error("additive solve: recursion limit reached");
  std::vector<PSeries> out;
  const bool rhs_visible = !rhs.is_zero_at_precision();

  std::vector<std::pair<BigInt, Rational>> pts;
  if (rhs_visible) pts.emplace_back(0, rhs.val().finite());
  for (const auto& [i, g] : f.coeffs()) {
    if (g.is_zero_at_precision()) continue;
    pts.emplace_back(int_pow(f.q(), i), g.val().finite());
  }
  const auto hull = odetail::lower_hull(std::move(pts));

  if (!rhs_visible) {
    // One true solution is indistinguishable from zero here. Its precision
    // comes from pushing the unseen part of rhs through the lowest term.
    Valuation zero_prec = rhs.precision();
    if (zero_prec.is_finite()) {
      unsigned i_low = 0;
      Rational v_low;
      for (const auto& [i, g] : f.coeffs())
        if (!g.is_zero_at_precision()) {
          i_low = i;
          v_low = g.val().finite();
          break;
        }
      const Rational zp =
          (zero_prec.finite() - v_low) / Rational(int_pow(f.q(), i_low));
      const Rational w_top = odetail::kernel_top_valuation(f);
      if (zp <= w_top || (min_val && zp <= *min_val))
        throw Error("precision exhausted mid-lift; achieved O(u^" + zero_prec.finite().str() + ")");
      zero_prec = Valuation(zp);
    }
    out.push_back(PSeries(zero_prec, e_max));
  }

  for (size_t k = 0; k + 1 < hull.size(); ++k) {
    const auto& [x0, y0] = hull[k];
    const auto& [x1, y1] = hull[k + 1];
    const Rational slope = (y1 - y0) / Rational(x1 - x0);
    const Rational w = -slope;
    if (min_val && w <= *min_val) continue;
    if (w >= prec || w.den() > e_max) {
      // Below resolution, either past the requested precision or past the
      // ramification bound (wild expansions double their exponent
      // denominators every step and must be cut somewhere). The roots on
      // this edge collapse onto zero at the achievable precision.
      const Rational cap = w >= prec ? prec : w;
      for (BigInt c = 0; c < x1 - x0; ++c) out.push_back(PSeries(Valuation(cap), e_max));
      continue;
    }
    // residual additive equation from the points on this edge
    std::map<unsigned, FFElem> residual;
    bool rhs_on_edge = rhs_visible && x0 == 0;
    for (const auto& [i, g] : f.coeffs()) {
      if (g.is_zero_at_precision()) continue;
      const BigInt x = int_pow(f.q(), i);
      if (x < x0 || x > x1) continue;
      const Rational y = g.val().finite();
      if ((y1 - y0) * Rational(x - x0) == (y - y0) * Rational(x1 - x0))
        residual.emplace(i, g.lead_coeff());
    }
    const FFElem beta = rhs_on_edge ? rhs.lead_coeff() : tw.zero(1);
    std::vector<FFElem> etas = residual_solve(tw, residual, f.q(), beta);
    for (const FFElem& eta : etas) {
      if (eta.is_zero()) continue;
      const PSeries lead = PSeries::monomial(eta, w, Valuation::infinity(), e_max);
      const PSeries next_rhs = rhs - f.eval(lead);
      const auto subs = additive_solve(tw, f, next_rhs, w, prec, e_max, depth_guard + 1);
      for (const PSeries& s : subs) out.push_back(lead + s);
    }
  }
  return out;
}

/// All q^r roots of phi_T (the zero root included) to the stated precision.
inline std::vector<PSeries> phi_roots(FieldTower& tw, const DrinfeldModule& M,
                                      const Rational& precision,
                                      long e_max = PSeries::kDefaultEMax) {
  PSeries zero;  // exact zero
  auto roots = additive_solve(tw, M.phi_T(), zero, std::nullopt, precision, e_max);
  const BigInt expect = int_pow(M.q(), M.r());
  if (BigInt(roots.size()) != expect)
    throw Error("phi_roots: found " + std::to_string(roots.size()) + " roots, expected q^r");
  std::sort(roots.begin(), roots.end(),
            [](const PSeries& a, const PSeries& b) { return a.sort_key() < b.sort_key(); });
  return roots;
}

/// The T-power torsion tower of a module: level k holds all q^(rk) roots of
/// phi_(T^k), built fiberwise by solving phi_T(x) = y over level k-1, plus a
/// compatible chain x_k with phi_T(x_k) = x_(k-1), x_1 != 0, chosen with
/// maximal valuation (ties by serialized form).
struct TorsionTower {
  DrinfeldModule mod;
  Rational precision;
  std::vector<std::vector<PSeries>> levels;
  std::vector<std::vector<size_t>> parents;  // index into the previous level
  std::vector<PSeries> chain;                // x_1 .. x_depth
};

inline void torsion_extend(FieldTower& tw, TorsionTower& t, long e_max) {
  const unsigned k = static_cast<unsigned>(t.levels.size());
  try {
    if (k == 0) {
      t.levels.push_back(phi_roots(tw, t.mod, t.precision, e_max));
      t.parents.emplace_back(t.levels[0].size(), 0);
    } else {
      std::vector<PSeries> level;
      std::vector<size_t> parent;
      const BigInt per_fiber = int_pow(t.mod.q(), t.mod.r());
      for (size_t yi = 0; yi < t.levels[k - 1].size(); ++yi) {
        auto fiber =
            additive_solve(tw, t.mod.phi_T(), t.levels[k - 1][yi], std::nullopt, t.precision, e_max);
        if (BigInt(fiber.size()) != per_fiber)
          throw Error("torsion fiber has wrong cardinality");
        std::sort(fiber.begin(), fiber.end(),
                  [](const PSeries& a, const PSeries& b) { return a.sort_key() < b.sort_key(); });
        for (auto& x : fiber) {
          level.push_back(std::move(x));
          parent.push_back(yi);
        }
      }
      t.levels.push_back(std::move(level));
      t.parents.push_back(std::move(parent));
    }
  } catch (const Error& err) {
    throw Error("torsion level " + std::to_string(k + 1) + ": " + err.what());
  }
  // extend the compatible chain
  const auto& level = t.levels.back();
  std::optional<size_t> best;
  for (size_t i = 0; i < level.size(); ++i) {
    if (level[i].is_zero_at_precision()) continue;
    if (k == 0) {
      // x_1: any nonzero torsion point
    } else {
      const PSeries& prev = t.chain[k - 1];
      const size_t pi = t.parents[k][i];
      if (!(t.levels[k - 1][pi].sort_key() == prev.sort_key())) continue;
    }
    if (!best) {
      best = i;
      continue;
    }
    const Valuation vb = level[*best].val(), vi = level[i].val();
    if (vi > vb || (vi == vb && level[i].sort_key() < level[*best].sort_key())) best = i;
  }
  if (!best) throw Error("torsion level " + std::to_string(k + 1) + ": no chain continuation");
  t.chain.push_back(level[*best]);
}

inline TorsionTower torsion_tower(FieldTower& tw, const DrinfeldModule& M, unsigned depth,
                                  const Rational& precision, long e_max = PSeries::kDefaultEMax) {
  if (depth < 1) throw Error("torsion tower depth must be >= 1");
  TorsionTower t{M, precision, {}, {}, {}};
  for (unsigned k = 0; k < depth; ++k) torsion_extend(tw, t, e_max);
  return t;
}

/// Observed ramification and residue data over all nonzero torsion points of
/// all levels of the tower. e_obs comes from the valuations alone: those are
/// genuine value-group elements of the torsion field, so their denominators
/// divide the ramification index. (Deeper exponents of a series are not
/// value-group data in characteristic p: wild expansions accumulate
/// unbounded denominators even for elements of a tamely bounded field.)
/// f_obs uses every visible coefficient, all of which live in the residue
/// extension the solver constructed.
inline RamificationMeasure torsion_measure(const TorsionTower& t) {
  RamificationMeasure m{1, 1};
  bool any = false;
  for (const auto& level : t.levels)
    for (const auto& x : level) {
      if (x.is_zero_at_precision()) continue;
      any = true;
      m.e_obs = lcm(m.e_obs, x.val().finite().den());
      for (const auto& [exp, c] : x.terms()) {
        FieldTower* tw = c.field()->tower;
        m.f_obs = static_cast<unsigned>(std::lcm(m.f_obs, tw->degree_over(c, t.mod.e())));
      }
    }
  if (!any) throw Error("torsion tower has no visible nonzero points");
  return m;
}

namespace odetail {

/// F_q-echelonized list of series: supports reduction of a new series by
/// F_q-combinations of rows matching its leading terms.
class FqEchelon {
 public:
  FqEchelon(FieldTower* tw, unsigned e) : tw_(tw), e_(e) {}

  /// Reduces x against the rows in place; returns true when x became zero at
  /// its precision (dependent at working precision).
  bool reduce(PSeries& x) const {
    for (;;) {
      if (x.is_zero_at_precision()) return true;
      const Rational v = x.val().finite();
      std::vector<size_t> at;
      for (size_t i = 0; i < rows_.size(); ++i)
        if (rows_[i].val() == Valuation(v)) at.push_back(i);
      if (at.empty()) return false;
      // express lead(x) as an F_q-combination of the rows' leading coeffs
      std::vector<FFElem> gens;
      const FFElem omega = tw_->gen(e_);
      for (size_t i : at) {
        FFElem b = rows_[i].lead_coeff();
        FFElem w = tw_->one(e_);
        for (unsigned tpow = 0; tpow < e_; ++tpow) {
          gens.push_back(b * w);
          w = w * omega;
        }
      }
      unsigned M = x.lead_coeff().degree();
      for (const FFElem& g : gens) M = static_cast<unsigned>(std::lcm(M, g.degree()));
      std::vector<std::vector<unsigned>> A(M, std::vector<unsigned>(gens.size(), 0));
      for (size_t j = 0; j < gens.size(); ++j) {
        const FFElem g = tw_->embed(gens[j], M);
        for (unsigned i = 0; i < M; ++i) A[i][j] = g.coords()[i];
      }
      auto sol = solve_fp(tw_->p(), std::move(A), tw_->embed(x.lead_coeff(), M).coords());
      if (!sol) return false;
      // alpha for row at[i] = sum_t sol[i*e + t] * omega^t
      size_t idx = 0;
      for (size_t i : at) {
        FFElem alpha = tw_->zero(e_);
        FFElem w = tw_->one(e_);
        for (unsigned tpow = 0; tpow < e_; ++tpow) {
          if (sol->particular[idx] != 0) {
            std::vector<unsigned> sc(w.coords());
            for (auto& cc : sc) cc = ffdetail::mulm(cc, sol->particular[idx], tw_->p());
            alpha = alpha + tw_->from_coords(e_, sc);
          }
          w = w * omega;
          ++idx;
        }
        if (!alpha.is_zero()) x = x - rows_[i].scaled(alpha);
      }
    }
  }

  /// Returns false when x is dependent at working precision.
  bool insert(PSeries x) {
    if (reduce(x)) return false;
    rows_.push_back(std::move(x));
    return true;
  }

  bool member(const PSeries& x) const {
    PSeries y = x;
    return reduce(y);
  }

  size_t dim() const { return rows_.size(); }

 private:
  FieldTower* tw_;
  unsigned e_;
  std::vector<PSeries> rows_;
};

}  // namespace odetail

enum class TieBreak { LexSmallest, LexLargest };

/// Extends a known-exact root prefix of the additive equation f(x) = 0 to
/// the requested precision by following the first Newton-polygon edge of
/// each residual (the continuation closest to the prefix, deterministic).
/// Refinement stops early, with an honestly reduced precision, when the
/// expansion turns wild and its exponent denominators outgrow e_max.
inline PSeries refine_root(FieldTower& tw, const AddPoly& f, const PSeries& prefix,
                           const Rational& prec, long e_max) {
  PSeries x = prefix.with_exact_terms();
  for (int guard = 0; guard < 100000; ++guard) {
    const PSeries residual = f.eval(x).negated();
    if (residual.is_zero_at_precision()) return x;  // exact root
    const Rational rv = residual.val().finite();
    std::vector<std::pair<BigInt, Rational>> pts{{0, rv}};
    for (const auto& [i, g] : f.coeffs()) {
      if (g.is_zero_at_precision()) continue;
      pts.emplace_back(int_pow(f.q(), i), g.val().finite());
    }
    const auto hull = odetail::lower_hull(std::move(pts));
    const auto& [x1, y1] = hull[1];
    const Rational w = (rv - y1) / Rational(x1);
    if (w >= prec) return x.truncated(Valuation(prec));
    if (w.den() > e_max) return x.truncated(Valuation(w));
    if (!x.terms().empty() && !(w > x.terms().rbegin()->first))
      throw Error("refine_root: residual does not advance; prefix is not a root prefix");
    std::map<unsigned, FFElem> residual_poly;
    for (const auto& [i, g] : f.coeffs()) {
      if (g.is_zero_at_precision()) continue;
      const BigInt xi = int_pow(f.q(), i);
      if (xi > x1) continue;
      const Rational y = g.val().finite();
      if ((y1 - rv) * Rational(xi) == (y - rv) * Rational(x1)) residual_poly.emplace(i, g.lead_coeff());
    }
    const auto etas = residual_solve(tw, residual_poly, f.q(), residual.lead_coeff());
    if (etas.empty()) throw Error("refine_root: residual equation has no solution");
    x = x + PSeries::monomial(etas.front(), w, Valuation::infinity(), e_max);
  }
  throw Error("refine_root: iteration limit reached");
}

/// Approximate successive minimum basis of the period lattice.
struct PeriodApprox {
  std::vector<PSeries> basis;  // r series approximating an SMB
  unsigned depth_used = 0;
  std::vector<Rational> logs;  // exact rational log sizes, nondecreasing
};

namespace odetail {

/// Greedy phi-stable minimum basis of one torsion level: repeatedly picks
/// the smallest element outside the phi_T-stable F_q-span of the previous
/// picks. Returns the r picked elements in order.
inline std::vector<PSeries> greedy_level_basis(FieldTower& tw, const DrinfeldModule& M,
                                               const std::vector<PSeries>& level, TieBreak tb) {
  std::vector<const PSeries*> sorted;
  for (const auto& x : level)
    if (!x.is_zero_at_precision()) sorted.push_back(&x);
  std::sort(sorted.begin(), sorted.end(), [&](const PSeries* a, const PSeries* b) {
    // smallest absolute value first: largest valuation first
    if (a->val() != b->val()) return b->val() < a->val();
    const std::string ka = a->sort_key(), kb = b->sort_key();
    return tb == TieBreak::LexSmallest ? ka < kb : kb < ka;
  });
  FqEchelon span(&tw, M.e());
  std::vector<PSeries> picks;
  for (const PSeries* x : sorted) {
    if (picks.size() == M.r()) break;
    if (span.member(*x)) continue;
    picks.push_back(*x);
    // close the span under phi_T
    std::deque<PSeries> queue{*x};
    while (!queue.empty()) {
      PSeries y = std::move(queue.front());
      queue.pop_front();
      if (span.insert(y)) queue.push_back(M.phi_T().eval(y));
    }
  }
  if (picks.size() != M.r())
    throw Error("torsion level spans fewer than r independent directions; increase depth or precision");
  return picks;
}

}  // namespace odetail

/// Recovers an SMB approximation from the top two levels of the tower via
/// lambda = lim T^n x_n. Log sizes are read as n - val(x); the run is
/// accepted only when they agree between depths n-1 and n. The picked
/// torsion points are then re-lifted against phi_(T^n) directly, which
/// extends the tame part of their expansions to the tower's precision.
inline PeriodApprox recover_periods(FieldTower& tw, const TorsionTower& t,
                                    TieBreak tb = TieBreak::LexSmallest) {
  const unsigned n = static_cast<unsigned>(t.levels.size());
  if (n < 2) throw Error("increase depth: period recovery needs at least two torsion levels");
  auto prev = odetail::greedy_level_basis(tw, t.mod, t.levels[n - 2], tb);
  auto top = odetail::greedy_level_basis(tw, t.mod, t.levels[n - 1], tb);
  std::vector<Rational> logs_prev, logs_top;
  for (const auto& x : prev) logs_prev.push_back(Rational(n - 1) - x.val().finite());
  for (const auto& x : top) logs_top.push_back(Rational(n) - x.val().finite());
  if (logs_prev != logs_top)
    throw Error("increase depth: period log sizes did not stabilize");
  PeriodApprox out;
  out.depth_used = n;
  out.logs = logs_top;
  std::vector<FFElem> tn(n + 1, tw.zero(t.mod.e()));
  tn[n] = tw.one(t.mod.e());
  const AddPoly phi_tn = t.mod.action(tn);
  const long e_max = top.front().e_max();
  const FFElem unit = tw.one(t.mod.e());
  for (const auto& x : top) {
    const PSeries lifted = refine_root(tw, phi_tn, x, t.precision, e_max);
    out.basis.push_back(lifted.mul_monomial(unit, Rational(-static_cast<long long>(n))));
  }
  return out;
}

/// Truncated lattice exponential: e(z) = z * prod (1 - z/lambda) over the
/// nonzero lattice points with all coordinate degrees <= trunc. When every
/// input is exact an explicit working precision is required.
inline PSeries exp_truncated(FieldTower& tw, unsigned q, std::span<const PSeries> basis,
                             unsigned trunc, const PSeries& z,
                             std::optional<Rational> prec = std::nullopt) {
  if (z.is_zero_at_precision()) return z;
  const auto [p, e] = AddPoly::factor_prime_power(q);
  if (p != tw.p()) throw Error("exp_truncated: tower characteristic mismatch");
  const size_t r = basis.size();
  const unsigned digits_per_coord = trunc + 1;
  // lattice points: a_i(T) = sum c_(i,k) T^k with c in F_q, deg <= trunc
  std::vector<std::uint64_t> counter(r * digits_per_coord, 0);
  PSeries result = z;
  const FFElem one = tw.one(e);
  for (;;) {
    // advance odometer (skip the zero point by advancing first)
    size_t pos = 0;
    while (pos < counter.size() && ++counter[pos] == q) counter[pos++] = 0;
    if (pos == counter.size()) break;
    PSeries lambda;
    bool first = true;
    for (size_t i = 0; i < r; ++i)
      for (unsigned k = 0; k < digits_per_coord; ++k) {
        const std::uint64_t c = counter[i * digits_per_coord + k];
        if (c == 0) continue;
        const PSeries term =
            basis[i].mul_monomial(tw.element(e, c), Rational(-static_cast<long long>(k)));
        lambda = first ? term : lambda + term;
        first = false;
      }
    // 1 - z/lambda; exact multi-term lattice points need the explicit target
    PSeries factor = PSeries::monomial(one, Rational(0)) - z * lambda.inverse(prec);
    result = result * factor;
  }
  return result;
}

struct FunctionalEqReport {
  std::vector<Rational> margins;  // per sample: val(residual) - val(phi_T(e(z)))
  Rational min_margin;
};

/// Checks e(Tz) = phi_T(e(z)) on deterministic sample points with the
/// truncated exponential; reports how far beyond val(phi_T(e(z))) the
/// residual sinks.
inline FunctionalEqReport verify_functional_equation(FieldTower& tw, const DrinfeldModule& M,
                                                     const PeriodApprox& periods, unsigned samples,
                                                     unsigned trunc) {
  FunctionalEqReport rep;
  const FFElem one = tw.one(M.e());
  for (unsigned i = 0; i < samples; ++i) {
    // z = c * u^j, coefficients and exponents cycling deterministically
    const unsigned j = i / 2;
    const std::uint64_t cidx = 1 + i % std::max(1u, M.q() - 1);
    PSeries z = PSeries::monomial(tw.element(M.e(), cidx), Rational(j), Valuation::infinity());
    if (i % 3 == 2) z = z + PSeries::monomial(one, Rational(j + 1), Valuation::infinity());
    const PSeries tz = z.mul_monomial(one, Rational(-1));
    const PSeries lhs = exp_truncated(tw, M.q(), periods.basis, trunc, tz);
    const PSeries rhs = M.phi_T().eval(exp_truncated(tw, M.q(), periods.basis, trunc, z));
    const PSeries residual = lhs - rhs;
    const Valuation rv = residual.val_lower_bound();
    const Valuation bv = rhs.val_lower_bound();
    if (bv.is_infinite()) throw Error("functional equation sample degenerated to zero");
    const Rational margin =
        (rv.is_infinite() ? residual.precision().finite() : rv.finite()) - bv.finite();
    rep.margins.push_back(margin);
  }
  if (rep.margins.empty()) throw Error("functional equation check needs at least one sample");
  rep.min_margin = rep.margins[0];
  for (const Rational& m : rep.margins)
    if (m < rep.min_margin) rep.min_margin = m;
  return rep;
}

/// Full oracle pass over one module: torsion tower (deepened until the
/// period logs stabilize, up to cfg.depth), recovered spectrum, and the
/// observed (e, f).
struct OracleAnalysis {
  TorsionTower tower;
  PeriodApprox periods;
  RamificationMeasure measure;
  Spectrum spectrum;
};

inline OracleAnalysis oracle_analyze(FieldTower& tw, const DrinfeldModule& M,
                                     const OracleConfig& cfg, TieBreak tb = TieBreak::LexSmallest) {
  TorsionTower t{M, cfg.precision, {}, {}, {}};
  torsion_extend(tw, t, cfg.e_max);
  std::optional<PeriodApprox> periods;
  std::string last_err = "increase depth";
  while (t.levels.size() < cfg.depth) {
    torsion_extend(tw, t, cfg.e_max);
    try {
      periods = recover_periods(tw, t, tb);
      break;
    } catch (const Error& err) {
      last_err = err.what();
    }
  }
  if (!periods) throw Error(last_err);
  OracleAnalysis out{std::move(t), std::move(*periods), {}, {}};
  out.measure = torsion_measure(out.tower);
  out.spectrum = Spectrum(M.q(), out.periods.logs);
  return out;
}

}  // namespace dmspec
