#pragma once

#include "dmspec/pseries.hpp"

#include <map>
#include <span>
#include <utility>
#include <vector>

namespace dmspec {

/// F_q-linear polynomial sum_i g_i X^(q^i). Coefficients are series in
/// u = T^(-1); exact values are single-term series of infinite precision.
class AddPoly {
 public:
  AddPoly(unsigned q, std::map<unsigned, PSeries> coeffs) : q_(q), c_(std::move(coeffs)) {
    if (q_ < 2) throw Error("additive polynomial needs a prime power q >= 2");
    if (c_.empty()) throw Error("additive polynomial needs at least one coefficient");
  }

  unsigned q() const { return q_; }
  unsigned top_index() const { return c_.rbegin()->first; }
  const std::map<unsigned, PSeries>& coeffs() const { return c_; }

  const PSeries* coeff(unsigned i) const {
    auto it = c_.find(i);
    return it == c_.end() ? nullptr : &it->second;
  }

  /// q as p^e.
  static std::pair<unsigned, unsigned> factor_prime_power(unsigned q) {
    for (unsigned p = 2; p <= q; ++p) {
      bool prime = true;
      for (unsigned d = 2; d * d <= p; ++d)
        if (p % d == 0) prime = false;
      if (!prime) continue;
      unsigned e = 0, t = q;
      while (t % p == 0) {
        t /= p;
        ++e;
      }
      if (t == 1 && e > 0) return {p, e};
      if (q % p == 0) break;
    }
    throw Error("q = " + std::to_string(q) + " is not a prime power");
  }

  /// Evaluates sum g_i x^(q^i). Output precision is the minimum over i of
  /// the precision of g_i x^(q^i); truncation is tracked, never hidden.
  PSeries eval(const PSeries& x) const {
    const auto [p, e] = factor_prime_power(q_);
    PSeries acc;
    bool first = true;
    PSeries xq = x;  // x^(q^i), advanced as i walks up
    unsigned cur = 0;
    for (const auto& [i, g] : c_) {
      for (; cur < i; ++cur) xq = xq.pow_q(p, e);
      PSeries term = g * xq;
      acc = first ? term : acc + term;
      first = false;
    }
    return acc;
  }

  friend AddPoly operator+(const AddPoly& a, const AddPoly& b) {
    if (a.q_ != b.q_) throw Error("additive polynomials over different F_q");
    std::map<unsigned, PSeries> out = a.c_;
    for (const auto& [i, g] : b.c_) {
      auto it = out.find(i);
      if (it == out.end())
        out.emplace(i, g);
      else
        it->second = it->second + g;
    }
    return AddPoly(a.q_, std::move(out));
  }

  /// this(g(X)): twisted coefficient products (f.g)_k = sum f_i * g_j^(q^i).
  AddPoly compose(const AddPoly& g) const {
    if (q_ != g.q_) throw Error("additive polynomials over different F_q");
    const auto [p, e] = factor_prime_power(q_);
    std::map<unsigned, PSeries> out;
    for (const auto& [i, fi] : c_) {
      for (const auto& [j, gj] : g.c_) {
        PSeries twisted = gj;
        for (unsigned k = 0; k < i * e; ++k) twisted = twisted.pow_q(p, 1);
        PSeries term = fi * twisted;
        auto it = out.find(i + j);
        if (it == out.end())
          out.emplace(i + j, std::move(term));
        else
          it->second = it->second + term;
      }
    }
    return AddPoly(q_, std::move(out));
  }

  /// c * f(X) for c in F_q.
  AddPoly scaled(const FFElem& c) const {
    std::map<unsigned, PSeries> out;
    for (const auto& [i, g] : c_) out.emplace(i, g.scaled(c));
    return AddPoly(q_, std::move(out));
  }

 private:
  unsigned q_;
  std::map<unsigned, PSeries> c_;
};

/// Rank-r Drinfeld F_q[T]-module over a finite extension of F_q((1/T)),
/// described by its T-operator phi_T(X) = TX + g_1 X^q + ... + g_r X^(q^r).
class DrinfeldModule {
 public:
  DrinfeldModule(unsigned q, unsigned p, unsigned r, AddPoly phi_T)
      : q_(q), p_(p), r_(r), phi_(std::move(phi_T)) {
    const auto [pp, e] = AddPoly::factor_prime_power(q);
    if (pp != p) throw Error("q is not a power of the given characteristic p");
    e_ = e;
    const PSeries* c0 = phi_.coeff(0);
    if (c0 == nullptr || c0->terms().size() != 1 || c0->val() != Valuation(Rational(-1)) ||
        !c0->lead_coeff().is_one() || c0->precision().is_finite())
      throw Error("missing T-term: index-0 coefficient of phi_T must be exactly T");
    const PSeries* top = phi_.coeff(r);
    if (phi_.top_index() != r || top == nullptr || top->is_zero_at_precision())
      throw Error("rank collapse: leading coefficient g_r vanishes");
  }

  unsigned q() const { return q_; }
  unsigned p() const { return p_; }
  /// Degree e with q = p^e.
  unsigned e() const { return e_; }
  unsigned r() const { return r_; }
  const AddPoly& phi_T() const { return phi_; }

  /// phi_a for a nonzero polynomial a(T) over F_q (coefficients little-endian).
  AddPoly action(std::span<const FFElem> a) const {
    size_t deg = a.size();
    while (deg > 0 && a[deg - 1].is_zero()) --deg;
    if (deg == 0) throw Error("drinfeld action of zero");
    std::map<unsigned, PSeries> ident;
    ident.emplace(0u, PSeries::monomial(a[0].field()->tower->one(e_), Rational(0)));
    AddPoly power(q_, ident);  // phi_{T^k}, k = 0 to start
    AddPoly acc = power.scaled(a[0]);
    for (size_t k = 1; k < deg; ++k) {
      power = phi_.compose(power);
      if (!a[k].is_zero()) acc = acc + power.scaled(a[k]);
    }
    return acc;
  }

 private:
  unsigned q_, p_, e_, r_;
  AddPoly phi_;
};

/// Builds a validated module from coefficient series g_1..g_r (keys 1..r).
/// The T-term is supplied by the constructor from the tower.
inline DrinfeldModule drinfeld_from_coeffs(FieldTower& tower, unsigned q, unsigned p, unsigned r,
                                           std::map<unsigned, PSeries> coeffs) {
  const auto [pp, e] = AddPoly::factor_prime_power(q);
  if (pp != p) throw Error("q is not a power of the given characteristic p");
  for (const auto& [i, g] : coeffs)
    if (i == 0 || i > r) throw Error("coefficient index out of range 1..r");
  coeffs.emplace(0u, PSeries::monomial(tower.one(e), Rational(-1)));
  return DrinfeldModule(q, p, r, AddPoly(q, std::move(coeffs)));
}

}  // namespace dmspec
