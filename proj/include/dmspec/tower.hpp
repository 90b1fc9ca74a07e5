#pragma once

#include "dmspec/spectral.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dmspec {

/// One packet B_tau of the spectral filtration: basis vectors of equal size.
struct Packet {
  Rational log_value;
  unsigned r_tau = 0;
  bool operator==(const Packet&) const = default;
};

/// The spectral filtration of a lattice: packets of equal-size basis vectors
/// in increasing size order, with their multiplicities.
struct Filtration {
  unsigned q = 2;
  std::vector<Packet> packets;

  unsigned t() const { return static_cast<unsigned>(packets.size()); }
  unsigned rank() const {
    unsigned r = 0;
    for (const auto& pk : packets) r += pk.r_tau;
    return r;
  }
  /// Cumulative ranks r-bar_tau for tau = 0..t.
  std::vector<unsigned> cumulative_ranks() const {
    std::vector<unsigned> out{0};
    for (const auto& pk : packets) out.push_back(out.back() + pk.r_tau);
    return out;
  }
  bool operator==(const Filtration&) const = default;
};

/// Run-length grouping of equal spectrum values, order preserved.
inline Filtration packets(const Spectrum& spec) {
  Filtration f;
  f.q = spec.q;
  for (const Rational& l : spec.logs) {
    if (!f.packets.empty() && f.packets.back().log_value == l)
      ++f.packets.back().r_tau;
    else
      f.packets.push_back(Packet{l, 1});
  }
  return f;
}

/// Weight w_tau of the pure space V_tau = e_(tau-1)(B_tau) together with its
/// exact denominator d_tau. w_1 is log lambda_1 itself (e_0 = id); for
/// tau > 1 the weight is the exponential-image size of the packet value over
/// the sublattice spanned by the earlier packets.
inline std::vector<std::pair<Rational, BigInt>> filtration_weights(const Spectrum& spec) {
  const Filtration f = packets(spec);
  std::vector<std::pair<Rational, BigInt>> out;
  std::vector<Rational> sub;
  for (size_t tau = 0; tau < f.packets.size(); ++tau) {
    const Rational w = exp_size(Spectrum(spec.q, sub), f.packets[tau].log_value);
    out.emplace_back(w, w.den());
    for (unsigned i = 0; i < f.packets[tau].r_tau; ++i) sub.push_back(f.packets[tau].log_value);
  }
  return out;
}

/// Counts the matrices of the block shape a Galois element must have:
/// GL(r_tau, F_q) blocks on the diagonal, zeros above, and below the blocks
/// entries a with |a| <= |lambda_i / lambda_j|, of which there are
/// q^(floor(log lambda_i - log lambda_j) + 1).
inline BigInt galois_order_bound(const Spectrum& spec) {
  const Filtration f = packets(spec);
  BigInt bound = 1;
  for (const auto& pk : f.packets) bound *= gl_order(pk.r_tau, BigInt(spec.q));
  for (size_t a = 0; a < f.packets.size(); ++a)
    for (size_t b = 0; b < a; ++b) {
      const Rational diff = f.packets[a].log_value - f.packets[b].log_value;
      const BigInt per_entry = int_pow(spec.q, static_cast<unsigned>(diff.floor() + 1));
      const unsigned entries = f.packets[a].r_tau * f.packets[b].r_tau;
      for (unsigned k = 0; k < entries; ++k) bound *= per_entry;
    }
  return bound;
}

/// f(L(Lambda)|L) <= prod_tau (q^(r_tau) - 1) * p^(t-1).
inline BigInt residue_degree_bound(const Filtration& f, unsigned p) {
  BigInt bound = 1;
  for (const auto& pk : f.packets) bound *= int_pow(f.q, pk.r_tau) - 1;
  if (f.t() >= 1) bound *= int_pow(p, f.t() - 1);
  return bound;
}

/// denom(s), a proven divisor of the ramification index of L(lambda_1,
/// lambda_2) over K_infinity for a case-(b) 1-sparse module. When log g = 0,
/// the numerator of log Delta is coprime to p, and n is large, this equals
/// q^(n+1).
inline BigInt ramification_divisor(const SparseParams& sp) {
  const Rational logj =
      Rational(int_pow(sp.q, sp.r) - 1, BigInt(sp.q) - 1) * sp.log_g - sp.log_delta;
  if (!sparse_is_case_b(sp))
    throw Error("ramification divisor needs case (b); straight-line polygons give none");
  return sparse_psi(logj, sp.q, sp.r).den();
}

/// [F-bar : F] <= f(L|K_inf) * (q^r - 1) * p^(t-1), the constant-field bound.
inline BigInt constant_field_degree_bound(unsigned f_base, unsigned q, unsigned r, unsigned t,
                                          unsigned p) {
  BigInt bound = f_base;
  bound *= int_pow(q, r) - 1;
  if (t >= 1) bound *= int_pow(p, t - 1);
  return bound;
}

/// Packet sizes read off the polygon alone: (q^i, v(g_i)) is a break point
/// iff |lambda_i| < |lambda_(i+1)|, so breaks mark the packet boundaries.
/// Values of the spectrum are not needed for this.
inline std::vector<unsigned> packet_sizes_from_np(const NewtonPolygon& np, unsigned q, unsigned r) {
  std::vector<unsigned> sizes;
  unsigned current = 1;
  BigInt x = q;
  size_t v = 1;  // np.vertices[0] is the anchor (1, -1)
  for (unsigned i = 1; i < r; ++i, x *= q) {
    bool is_break = false;
    for (; v < np.vertices.size(); ++v) {
      if (np.vertices[v].first == x) {
        is_break = true;
        break;
      }
      if (np.vertices[v].first > x) break;
    }
    if (is_break) {
      sizes.push_back(current);
      current = 1;
    } else {
      ++current;
    }
  }
  sizes.push_back(current);
  return sizes;
}

/// Per-packet and global invariants of the field tower over one module.
struct TowerReport {
  Filtration filtration;
  std::vector<std::pair<Rational, BigInt>> weights;  // (w_tau, d_tau)
  std::vector<BigInt> f_tau_caps;                    // q^(r_tau) - 1
  BigInt galois_order;
  BigInt f_bound;
  std::optional<BigInt> ram_divisor;  // only for 1-sparse case (b)
};

inline TowerReport tower_report(const Spectrum& spec, unsigned p,
                                const std::optional<SparseParams>& sparse = std::nullopt) {
  TowerReport rep;
  rep.filtration = packets(spec);
  rep.weights = filtration_weights(spec);
  for (const auto& pk : rep.filtration.packets)
    rep.f_tau_caps.push_back(int_pow(spec.q, pk.r_tau) - 1);
  rep.galois_order = galois_order_bound(spec);
  rep.f_bound = residue_degree_bound(rep.filtration, p);
  if (sparse && sparse_is_case_b(*sparse)) rep.ram_divisor = ramification_divisor(*sparse);
  return rep;
}

/// One row of a ramification sweep over a family of 1-sparse modules.
struct SweepRow {
  Rational log_delta;
  std::optional<Rational> s;
  std::optional<BigInt> denom_s;
  std::optional<BigInt> ram_divisor;
  std::optional<BigInt> f_bound;
  std::optional<BigInt> e_obs;
  std::optional<BigInt> f_obs;
  std::string status = "ok";
};

/// Hook type for oracle measurements of (e_obs, f_obs) on one module.
using SweepMeasure = std::function<std::pair<BigInt, BigInt>(const SparseParams&)>;

/// Runs the family phi_T = TX + gX^q + Delta X^(q^r) over the given log
/// Delta values. Per-row errors are recorded in the status column and the
/// sweep continues; row order matches input order.
inline std::vector<SweepRow> sweep(unsigned q, unsigned p, unsigned r, const Rational& log_g,
                                   const std::vector<Rational>& log_deltas,
                                   const SweepMeasure& measure = nullptr) {
  std::vector<SweepRow> rows;
  for (const Rational& ld : log_deltas) {
    SweepRow row;
    row.log_delta = ld;
    const SparseParams sp{q, r, log_g, ld};
    try {
      const Spectrum spec = sparse_np_to_spectrum(sp);
      row.s = spec.logs.back() - spec.logs.front();
      row.denom_s = row.s->den();
      row.ram_divisor = ramification_divisor(sp);
      row.f_bound = residue_degree_bound(packets(spec), p);
      if (measure) {
        auto [e_obs, f_obs] = measure(sp);
        row.e_obs = e_obs;
        row.f_obs = f_obs;
      }
    } catch (const Error& err) {
      row.status = err.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace dmspec
