#pragma once

#include "dmspec/newton.hpp"
#include "dmspec/rational.hpp"

#include <map>
#include <set>
#include <utility>
#include <vector>

namespace dmspec {

/// Spectrum of a period lattice: the nondecreasing tuple of base-q logarithms
/// (log|lambda_1|, ..., log|lambda_r|) of a successive minimum basis.
struct Spectrum {
  unsigned q = 2;
  std::vector<Rational> logs;

  Spectrum() = default;
  Spectrum(unsigned q_, std::vector<Rational> logs_) : q(q_), logs(std::move(logs_)) {
    for (size_t i = 1; i < logs.size(); ++i)
      if (logs[i] < logs[i - 1]) throw Error("spectrum must be nondecreasing");
  }

  unsigned rank() const { return static_cast<unsigned>(logs.size()); }
  bool operator==(const Spectrum&) const = default;
};

/// Parameters of a 1-sparse module phi_T(X) = TX + g X^q + Delta X^(q^r),
/// recorded as base-q logs of |g| and |Delta|.
struct SparseParams {
  unsigned q = 2;
  unsigned r = 2;
  Rational log_g;
  Rational log_delta;
};

/// Number of nonzero lattice points lambda with log|lambda| <= c, using
/// orthogonality: sizes factor through coordinates, so the count is
/// prod_i q^(max(0, floor(c - log lambda_i) + 1)) - 1.
inline BigInt lattice_count_below(const Spectrum& spec, const Rational& c) {
  BigInt prod = 1;
  for (const Rational& l : spec.logs) {
    const Rational d = c - l;
    if (d < Rational(0)) continue;
    prod *= int_pow(spec.q, static_cast<unsigned>(d.floor() + 1));
  }
  return prod - 1;
}

/// log|e_Lambda'(x)| for any x with log|x| = c that sits orthogonally to the
/// sublattice: c + sum over nonzero mu in Lambda' with log mu <= c of
/// (c - log mu). The sum walks size classes, not points.
inline Rational exp_size(const Spectrum& sublattice, const Rational& c) {
  std::set<Rational> sizes;
  for (const Rational& l : sublattice.logs) {
    const Rational d = c - l;
    if (d < Rational(0)) continue;
    const BigInt top = d.floor();
    for (BigInt m = 0; m <= top; ++m) sizes.insert(l + Rational(m));
  }
  Rational out = c;
  BigInt count_prev = 0;
  for (const Rational& s : sizes) {
    const BigInt count_here = lattice_count_below(sublattice, s);
    out += (c - s) * Rational(count_here - count_prev);
    count_prev = count_here;
  }
  return out;
}

/// Sizes of the q^r - 1 nonzero roots of phi_T, derived from the spectrum:
/// the roots are e_Lambda((a_1 lambda_1 + ... + a_k lambda_k)/T) with top
/// index k, giving q^k - q^(k-1) roots of log-size exp_size(spec, log lambda_k - 1).
inline RootSizeMultiset spectrum_rootsizes(const Spectrum& spec) {
  if (spec.logs.empty()) throw Error("spectrum_rootsizes: empty spectrum");
  std::map<Rational, BigInt> agg;
  BigInt qk1 = 1;  // q^(k-1)
  for (size_t k = 1; k <= spec.logs.size(); ++k) {
    const Rational size = exp_size(spec, spec.logs[k - 1] - Rational(1));
    const BigInt count = qk1 * (spec.q - 1);
    agg[size] += count;
    qk1 *= spec.q;
  }
  RootSizeMultiset ms;
  for (auto it = agg.rbegin(); it != agg.rend(); ++it) ms.entries.emplace_back(it->first, it->second);
  return ms;
}

/// Newton polygon determined by the spectrum (forward direction of the
/// spectrum/polygon correspondence).
inline NewtonPolygon spectrum_to_np(const Spectrum& spec) {
  return np_from_rootsizes(spectrum_rootsizes(spec), spec.q, spec.rank());
}

/// The piecewise-linear function s -> (q^(r-1) - 1)(1/(q-1) + s - n) q^(n+1)
/// with n = floor(s); continuous, strictly increasing, convex on s >= 0.
inline Rational sparse_phi(const Rational& s, unsigned q, unsigned r) {
  if (s < Rational(0)) throw Error("sparse_phi: s must be >= 0");
  const BigInt n = s.floor();
  const Rational qr1 = Rational(int_pow(q, r - 1) - 1);
  const Rational qn1 = Rational(int_pow(q, static_cast<unsigned>(n + 1)));
  return qr1 * (Rational(1, q - 1) + s - Rational(n)) * qn1;
}

/// Exact inverse of sparse_phi on [phi(0), infinity): scans the integer
/// breakpoints for the linear piece containing logj and inverts it.
inline Rational sparse_psi(const Rational& logj, unsigned q, unsigned r) {
  if (logj < sparse_phi(Rational(0), q, r))
    throw Error("not in 1-sparse case (b) range: log j below phi(0)");
  unsigned n = 0;
  while (sparse_phi(Rational(n + 1), q, r) <= logj) ++n;
  const Rational qr1 = Rational(int_pow(q, r - 1) - 1);
  const Rational qn1 = Rational(int_pow(q, n + 1));
  return Rational(n) + logj / (qr1 * qn1) - Rational(1, q - 1);
}

/// True when (q, v(g)) lies strictly below the line through (1, -1) and
/// (q^r, v(Delta)); equality or above classifies as case (a).
inline bool sparse_is_case_b(const SparseParams& sp) {
  const Rational vg = -sp.log_g;
  const Rational vdelta = -sp.log_delta;
  const Rational chord_at_q =
      Rational(-1) + (vdelta + Rational(1)) * Rational(BigInt(sp.q) - 1, int_pow(sp.q, sp.r) - 1);
  return vg < chord_at_q;
}

/// Closed-form spectrum of a 1-sparse case-(b) module:
/// log lambda_1 = (q - log g)/(q - 1), s = psi(log j) with
/// log j = ((q^r - 1)/(q - 1)) log g - log Delta, and
/// log lambda_2 = ... = log lambda_r = log lambda_1 + s.
inline Spectrum sparse_np_to_spectrum(const SparseParams& sp) {
  if (sp.r < 2) throw Error("1-sparse module needs rank r >= 2");
  if (!sparse_is_case_b(sp))
    throw Error("spectrum has equal minima; closed form not provided in case (a), use the oracle");
  const Rational log_l1 = (Rational(sp.q) - sp.log_g) / Rational(sp.q - 1);
  const Rational logj =
      Rational(int_pow(sp.q, sp.r) - 1, BigInt(sp.q) - 1) * sp.log_g - sp.log_delta;
  const Rational s = sparse_psi(logj, sp.q, sp.r);
  std::vector<Rational> logs{log_l1};
  logs.resize(sp.r, log_l1 + s);
  return Spectrum(sp.q, std::move(logs));
}

/// log(lambda_2 / lambda_1) of a case-(b) 1-sparse module.
inline Rational sparse_spread(const SparseParams& sp) {
  const Spectrum spec = sparse_np_to_spectrum(sp);
  return spec.logs.back() - spec.logs.front();
}

}  // namespace dmspec
