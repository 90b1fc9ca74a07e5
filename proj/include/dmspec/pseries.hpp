#pragma once

#include "dmspec/finite_field.hpp"
#include "dmspec/rational.hpp"

#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace dmspec {

/// Truncated generalized power series in u = T^(-1) with rational exponents
/// and finite-field coefficients. The valuation convention is val(T^(-1)) = +1,
/// so log_q|x| = -val(x).
///
/// "Zero" is representable only as empty-at-precision: a series with no terms
/// below its precision bound. Every consumer must treat val = +infinity as
/// "indistinguishable from zero here".
class PSeries {
 public:
  /// Zero at the given precision (all exponents < prec unknown).
  explicit PSeries(Valuation prec = Valuation::infinity(), long e_max = kDefaultEMax)
      : prec_(std::move(prec)), e_max_(e_max) {}

  /// Single exact term c * u^exp, by default with infinite precision.
  static PSeries monomial(const FFElem& c, const Rational& exp,
                          Valuation prec = Valuation::infinity(), long e_max = kDefaultEMax) {
    PSeries out(std::move(prec), e_max);
    out.add_term(exp, c);
    return out;
  }

  static constexpr long kDefaultEMax = 4096;

  const std::map<Rational, FFElem>& terms() const { return t_; }
  const Valuation& precision() const { return prec_; }
  long e_max() const { return e_max_; }

  /// Least exponent with a nonzero coefficient; +infinity when there is none.
  Valuation val() const {
    if (t_.empty()) return Valuation::infinity();
    return Valuation(t_.begin()->first);
  }
  bool is_zero_at_precision() const { return t_.empty(); }

  const FFElem& lead_coeff() const {
    if (t_.empty()) throw Error("series has no visible term");
    return t_.begin()->second;
  }

  /// Lower bound on the valuation of the true value: val if visible, else prec.
  Valuation val_lower_bound() const { return t_.empty() ? prec_ : val(); }

  /// Adds c * u^exp, cancelling as needed. Terms at or beyond precision drop.
  void add_term(const Rational& exp, const FFElem& c) {
    if (c.is_zero()) return;
    if (Valuation(exp) >= prec_) return;
    if (exp.den() > e_max_)
      throw Error("ramification bound exceeded: exponent denominator " + exp.den().str() +
                  " > e_max " + std::to_string(e_max_));
    auto it = t_.find(exp);
    if (it == t_.end()) {
      t_.emplace(exp, c);
      return;
    }
    auto [x, y] = c.field()->tower->join(it->second, c);
    FFElem s = x + y;
    if (s.is_zero())
      t_.erase(it);
    else
      it->second = s;
  }

  PSeries truncated(const Valuation& new_prec) const {
    PSeries out(Valuation::min(prec_, new_prec), e_max_);
    for (const auto& [e, c] : t_) out.add_term(e, c);
    return out;
  }

  PSeries negated() const {
    PSeries out(prec_, e_max_);
    for (const auto& [e, c] : t_) out.t_.emplace(e, c.negated());
    return out;
  }

  friend PSeries operator+(const PSeries& a, const PSeries& b) {
    PSeries out(Valuation::min(a.prec_, b.prec_), std::min(a.e_max_, b.e_max_));
    for (const auto& [e, c] : a.t_) out.add_term(e, c);
    for (const auto& [e, c] : b.t_) out.add_term(e, c);
    return out;
  }
  friend PSeries operator-(const PSeries& a, const PSeries& b) { return a + b.negated(); }

  friend PSeries operator*(const PSeries& a, const PSeries& b) {
    // prec(xy) = min(prec_x + lb_y, prec_y + lb_x)
    Valuation prec = Valuation::min(a.prec_ + b.val_lower_bound(), b.prec_ + a.val_lower_bound());
    PSeries out(prec, std::min(a.e_max_, b.e_max_));
    for (const auto& [ea, ca] : a.t_)
      for (const auto& [eb, cb] : b.t_) {
        const Rational e = ea + eb;
        if (Valuation(e) >= prec) continue;
        auto [x, y] = ca.field()->tower->join(ca, cb);
        out.add_term(e, x * y);
      }
    return out;
  }

  /// c * x for a finite-field scalar.
  PSeries scaled(const FFElem& c) const {
    PSeries out(prec_, e_max_);
    if (c.is_zero()) return out;
    for (const auto& [e, k] : t_) {
      auto [x, y] = c.field()->tower->join(k, c);
      out.add_term(e, x * y);
    }
    return out;
  }

  /// x * (c * u^d) without building a second series.
  PSeries mul_monomial(const FFElem& c, const Rational& d) const {
    PSeries out(prec_ + d, e_max_);
    if (c.is_zero()) return PSeries(prec_ + d, e_max_);
    for (const auto& [e, k] : t_) {
      auto [x, y] = c.field()->tower->join(k, c);
      out.add_term(e + d, x * y);
    }
    return out;
  }

  /// x -> x^(p^e) term by term; exponents scale by p^e. Exact in
  /// characteristic p, and precision improves to p^e * prec.
  PSeries pow_q(unsigned p, unsigned e) const {
    Rational q(1);
    for (unsigned i = 0; i < e; ++i) q = q * Rational(p);
    Valuation prec = prec_.is_infinite() ? Valuation::infinity() : Valuation(prec_.finite() * q);
    PSeries out(prec, e_max_);
    for (const auto& [ex, c] : t_) {
      FFElem cq = c;
      for (unsigned i = 0; i < e; ++i) cq = cq.frobenius();
      out.add_term(ex * q, cq);
    }
    return out;
  }

  /// Declares the stored terms exact, dropping the precision bound. Only
  /// sound when every stored term is known to be a true term of the value.
  PSeries with_exact_terms() const {
    PSeries out(Valuation::infinity(), e_max_);
    for (const auto& [e, c] : t_) out.add_term(e, c);
    return out;
  }

  /// Multiplicative inverse. Output precision is prec_x - 2 val_x; when x is
  /// exact and not a monomial, an explicit output precision is required.
  PSeries inverse(std::optional<Rational> target_prec = std::nullopt) const {
    if (t_.empty()) throw Error("insufficient precision: cannot invert a series with no visible term");
    const Rational v = val().finite();
    const FFElem lead = lead_coeff();
    Valuation out_prec;
    if (prec_.is_finite())
      out_prec = Valuation(prec_.finite() - v - v);
    else if (t_.size() == 1)
      out_prec = Valuation::infinity();
    else if (target_prec)
      out_prec = Valuation(*target_prec);
    else
      throw Error("inverse of an exact multi-term series needs a target precision");
    if (target_prec && Valuation(*target_prec) < out_prec) out_prec = Valuation(*target_prec);

    const FFElem lead_inv = lead.inverse();
    if (t_.size() == 1) return PSeries::monomial(lead_inv, -v, out_prec, e_max_);

    // y = x * lead^{-1} u^{-v} = 1 + w with val(w) > 0; invert by Newton:
    // z <- z + z*(1 - y*z), then shift back.
    const Rational rel = out_prec.finite() + v;  // relative precision needed for 1/y
    PSeries y = mul_monomial(lead_inv, -v).truncated(Valuation(rel));
    const FFElem one = lead_inv * lead;
    PSeries z = PSeries::monomial(one, Rational(0), Valuation(rel), e_max_);
    for (int guard = 0; guard < 64; ++guard) {
      PSeries err = PSeries::monomial(one, Rational(0), Valuation(rel), e_max_) - (y * z).truncated(Valuation(rel));
      if (err.is_zero_at_precision() && err.precision() >= Valuation(rel)) break;
      z = (z + (z * err)).truncated(Valuation(rel));
    }
    return z.mul_monomial(lead_inv, -v).truncated(out_prec);
  }

  unsigned p() const {
    if (t_.empty()) throw Error("series has no visible term");
    return t_.begin()->second.p();
  }

  /// Text form: sum of c*T^(-a/b) terms plus + O(T^(-P)).
  std::string str() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : t_) {
      if (!first) os << " + ";
      first = false;
      if (c.degree() == 1) {
        os << c.coords()[0];
      } else {
        os << "(";
        for (size_t i = 0; i < c.coords().size(); ++i) {
          if (i) os << ",";
          os << c.coords()[i];
        }
        os << ")";
      }
      os << "*T^(" << (-e).str() << ")";
    }
    if (first) os << "0";
    if (prec_.is_finite()) os << " + O(T^(" << (-prec_.finite()).str() << "))";
    return os.str();
  }

  /// Deterministic total order: by serialized form of (terms, precision).
  std::string sort_key() const {
    std::ostringstream os;
    for (const auto& [e, c] : t_) {
      os << e.str() << ":";
      for (unsigned x : c.coords()) os << x << ".";
      os << ";";
    }
    os << "|" << prec_.str();
    return os.str();
  }

 private:
  std::map<Rational, FFElem> t_;
  Valuation prec_;
  long e_max_;
};

struct RamificationMeasure {
  BigInt e_obs;      // lcm of exponent denominators
  unsigned f_obs;    // least d with all coefficients in F_{q^d}
};

/// Observed ramification and residue data of a set of series over F_q = F_{p^e}.
inline RamificationMeasure ps_measure(std::span<const PSeries> xs, unsigned e) {
  if (xs.empty()) throw Error("ps_measure: empty input");
  RamificationMeasure m{1, 1};
  for (const PSeries& x : xs) {
    if (x.is_zero_at_precision()) throw Error("ps_measure: series has no terms");
    for (const auto& [exp, c] : x.terms()) {
      m.e_obs = lcm(m.e_obs, exp.den());
      FieldTower* tw = c.field()->tower;
      m.f_obs = static_cast<unsigned>(std::lcm(m.f_obs, tw->degree_over(c, e)));
    }
  }
  return m;
}

}  // namespace dmspec
