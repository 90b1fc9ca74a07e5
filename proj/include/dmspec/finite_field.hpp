#pragma once

#include "dmspec/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <utility>
#include <vector>

namespace dmspec {

class FieldTower;

/// Defining data of one field F_{p^m} in a compatible tower.
///
/// The defining polynomial is the minimal polynomial of a fixed generator
/// g_m chosen so that g_m^((p^m-1)/(p^d-1)) is a root of the degree-d
/// defining polynomial for every divisor d of m. All embeddings are taken
/// along these generator powers, which makes every triangle of embeddings
/// commute by plain exponent arithmetic.
struct Field {
  unsigned p = 0;
  unsigned m = 0;
  std::vector<unsigned> poly;  // c_0..c_m over F_p, monic
  BigInt card_minus_1;         // p^m - 1
  std::vector<BigInt> card_prime_factors;
  FieldTower* tower = nullptr;
};

namespace ffdetail {

using Poly = std::vector<unsigned>;  // little-endian coefficients over F_p

inline void trim(Poly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

inline unsigned addm(unsigned a, unsigned b, unsigned p) { return (a + b) % p; }
inline unsigned subm(unsigned a, unsigned b, unsigned p) { return (a + p - b % p) % p; }
inline unsigned mulm(unsigned a, unsigned b, unsigned p) {
  return static_cast<unsigned>((static_cast<std::uint64_t>(a) * b) % p);
}

inline unsigned invm(unsigned a, unsigned p) {
  // extended euclid on machine ints; p prime, a != 0
  long long t = 0, nt = 1, r = p, nr = a % p;
  while (nr != 0) {
    long long q = r / nr;
    std::swap(t -= q * nt, nt);
    std::swap(r -= q * nr, nr);
  }
  if (t < 0) t += p;
  return static_cast<unsigned>(t);
}

inline Poly poly_add(const Poly& a, const Poly& b, unsigned p) {
  Poly out(std::max(a.size(), b.size()), 0);
  for (size_t i = 0; i < out.size(); ++i) {
    unsigned x = i < a.size() ? a[i] : 0;
    unsigned y = i < b.size() ? b[i] : 0;
    out[i] = addm(x, y, p);
  }
  trim(out);
  return out;
}

inline Poly poly_scale(const Poly& a, unsigned c, unsigned p) {
  Poly out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = mulm(a[i], c, p);
  trim(out);
  return out;
}

inline Poly poly_mul(const Poly& a, const Poly& b, unsigned p) {
  if (a.empty() || b.empty()) return {};
  Poly out(a.size() + b.size() - 1, 0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j)
      out[i + j] = addm(out[i + j], mulm(a[i], b[j], p), p);
  trim(out);
  return out;
}

inline Poly poly_mod(Poly a, const Poly& f, unsigned p) {
  trim(a);
  const size_t df = f.size() - 1;
  const unsigned lead_inv = invm(f.back(), p);
  while (a.size() > df) {
    const unsigned c = mulm(a.back(), lead_inv, p);
    const size_t shift = a.size() - 1 - df;
    for (size_t i = 0; i < f.size(); ++i)
      a[shift + i] = subm(a[shift + i], mulm(c, f[i], p), p);
    trim(a);
    if (a.empty()) break;
  }
  return a;
}

inline Poly poly_mulmod(const Poly& a, const Poly& b, const Poly& f, unsigned p) {
  return poly_mod(poly_mul(a, b, p), f, p);
}

inline Poly poly_powmod(Poly base, BigInt e, const Poly& f, unsigned p) {
  Poly out = {1};
  base = poly_mod(std::move(base), f, p);
  while (e > 0) {
    if ((e & 1) != 0) out = poly_mulmod(out, base, f, p);
    base = poly_mulmod(base, base, f, p);
    e >>= 1;
  }
  return out;
}

inline Poly poly_gcd(Poly a, Poly b, unsigned p) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    a = poly_mod(std::move(a), b, p);
    std::swap(a, b);
  }
  if (!a.empty() && a.back() != 1) a = poly_scale(a, invm(a.back(), p), p);
  return a;
}

/// Inverse of a modulo f (a nonzero, f irreducible).
inline Poly poly_invmod(const Poly& a, const Poly& f, unsigned p) {
  Poly r0 = f, r1 = poly_mod(a, f, p);
  Poly t0 = {}, t1 = {1};
  while (!r1.empty()) {
    // r0 = q*r1 + r2 by repeated leading-term elimination
    Poly q;
    Poly r2 = r0;
    const unsigned lead_inv = invm(r1.back(), p);
    while (r2.size() >= r1.size() && !r2.empty()) {
      const unsigned c = mulm(r2.back(), lead_inv, p);
      const size_t shift = r2.size() - r1.size();
      if (q.size() < shift + 1) q.resize(shift + 1, 0);
      q[shift] = c;
      for (size_t i = 0; i < r1.size(); ++i)
        r2[shift + i] = subm(r2[shift + i], mulm(c, r1[i], p), p);
      trim(r2);
    }
    Poly t2 = t0;
    Poly qt1 = poly_mul(q, t1, p);
    // t2 = t0 - q*t1
    Poly neg_qt1 = poly_scale(qt1, p - 1, p);
    t2 = poly_add(t2, neg_qt1, p);
    r0 = std::move(r1);
    r1 = std::move(r2);
    t0 = std::move(t1);
    t1 = std::move(t2);
  }
  if (r0.size() != 1) throw Error("division by zero in finite field");
  return poly_scale(t0, invm(r0[0], p), p);
}

inline bool poly_irreducible(const Poly& f, unsigned p) {
  const unsigned m = static_cast<unsigned>(f.size() - 1);
  if (m == 0) return false;
  // Rabin: x^(p^m) == x mod f, and gcd(x^(p^(m/l)) - x, f) = 1 for primes l | m
  Poly x = {0, 1};
  Poly xpm = poly_powmod(x, int_pow(p, m), f, p);
  if (poly_add(xpm, poly_scale(x, p - 1, p), p) != Poly{}) return false;
  unsigned mm = m;
  std::vector<unsigned> prime_divs;
  for (unsigned l = 2; l * l <= mm; ++l)
    if (mm % l == 0) {
      prime_divs.push_back(l);
      while (mm % l == 0) mm /= l;
    }
  if (mm > 1) prime_divs.push_back(mm);
  for (unsigned l : prime_divs) {
    Poly xp = poly_powmod(x, int_pow(p, m / l), f, p);
    Poly diff = poly_add(xp, poly_scale(x, p - 1, p), p);
    if (poly_gcd(diff, f, p).size() != 1) return false;
  }
  return true;
}

inline std::vector<BigInt> prime_factors(BigInt n) {
  std::vector<BigInt> out;
  for (BigInt d = 2; d * d <= n; ++d)
    if (n % d == 0) {
      out.push_back(d);
      while (n % d == 0) n /= d;
    }
  if (n > 1) out.push_back(n);
  return out;
}

}  // namespace ffdetail

/// Element of a finite field F_{p^m} inside a compatible tower.
/// Immutable after construction; arithmetic between elements of different
/// fields embeds along divisibility of degrees and fails otherwise.
class FFElem {
 public:
  FFElem() = default;
  FFElem(std::shared_ptr<const Field> f, std::vector<unsigned> coords)
      : f_(std::move(f)), c_(std::move(coords)) {
    c_.resize(f_->m, 0);
    for (auto& x : c_) x %= f_->p;
  }

  const std::shared_ptr<const Field>& field() const { return f_; }
  unsigned degree() const { return f_->m; }
  unsigned p() const { return f_->p; }
  /// Coordinates over F_p, little-endian in the generator.
  const std::vector<unsigned>& coords() const { return c_; }

  bool is_zero() const {
    return std::all_of(c_.begin(), c_.end(), [](unsigned x) { return x == 0; });
  }
  bool is_one() const {
    if (c_.empty() || c_[0] != 1) return false;
    return std::all_of(c_.begin() + 1, c_.end(), [](unsigned x) { return x == 0; });
  }

  friend FFElem operator+(const FFElem& a, const FFElem& b);
  friend FFElem operator-(const FFElem& a, const FFElem& b);
  friend FFElem operator*(const FFElem& a, const FFElem& b);
  friend bool operator==(const FFElem& a, const FFElem& b);
  friend bool operator!=(const FFElem& a, const FFElem& b) { return !(a == b); }

  FFElem negated() const {
    std::vector<unsigned> out(c_.size());
    for (size_t i = 0; i < c_.size(); ++i) out[i] = ffdetail::subm(0, c_[i], f_->p);
    return FFElem(f_, std::move(out));
  }

  FFElem inverse() const {
    if (is_zero()) throw Error("division by zero in finite field");
    return FFElem(f_, ffdetail::poly_invmod(c_, f_->poly, f_->p));
  }

  FFElem pow(BigInt e) const {
    if (e < 0) return inverse().pow(-e);
    return FFElem(f_, ffdetail::poly_powmod(c_, std::move(e), f_->poly, f_->p));
  }

  /// x -> x^p, the absolute Frobenius.
  FFElem frobenius() const { return pow(f_->p); }

  /// Total order on elements of one field: coordinates as a base-p number.
  friend bool lex_less(const FFElem& a, const FFElem& b) {
    for (size_t i = std::max(a.c_.size(), b.c_.size()); i-- > 0;) {
      unsigned x = i < a.c_.size() ? a.c_[i] : 0;
      unsigned y = i < b.c_.size() ? b.c_[i] : 0;
      if (x != y) return x < y;
    }
    return false;
  }

 private:
  std::shared_ptr<const Field> f_;
  std::vector<unsigned> c_;
};

/// Compatible tower of finite fields of one characteristic.
///
/// Fields are constructed on demand, divisors first. The defining
/// polynomial of F_{p^m} is the minimal polynomial of the first element (in
/// base-p coordinate order over a first-found irreducible working modulus)
/// that is a multiplicative generator and whose norms down to every maximal
/// subfield hit the subfield generators. The construction is deterministic,
/// so serialized elements are reproducible across runs.
class FieldTower {
 public:
  explicit FieldTower(unsigned p, BigInt field_cap = BigInt(1) << 20)
      : p_(p), cap_(std::move(field_cap)) {
    if (p < 2) throw Error("characteristic must be prime");
    for (unsigned d = 2; d * d <= p; ++d)
      if (p % d == 0) throw Error("characteristic must be prime");
  }

  unsigned p() const { return p_; }
  const BigInt& field_cap() const { return cap_; }

  std::shared_ptr<const Field> field(unsigned m) {
    auto it = fields_.find(m);
    if (it != fields_.end()) return it->second;
    if (int_pow(p_, m) > cap_) {
      throw Error("finite field cap exceeded: p^" + std::to_string(m) +
                  " > configured field_cap");
    }
    build(m);
    return fields_.at(m);
  }

  FFElem zero(unsigned m) { return FFElem(field(m), {}); }
  FFElem one(unsigned m) { return FFElem(field(m), {1}); }
  /// The canonical generator of F_{p^m} (class of X).
  FFElem gen(unsigned m) { return FFElem(field(m), {0, 1}); }
  FFElem from_coords(unsigned m, std::vector<unsigned> c) { return FFElem(field(m), std::move(c)); }
  /// Element number k in base-p coordinate order (k < p^m).
  FFElem element(unsigned m, std::uint64_t k) {
    std::vector<unsigned> c;
    while (k != 0) {
      c.push_back(static_cast<unsigned>(k % p_));
      k /= p_;
    }
    return FFElem(field(m), std::move(c));
  }

  /// Embeds a into F_{p^M}; the degree of a must divide M.
  FFElem embed(const FFElem& a, unsigned M) {
    const unsigned d = a.degree();
    if (d == M) return a;
    if (M % d != 0) throw Error("incompatible finite fields (neither degree divides the other)");
    const auto& pows = embed_powers(d, M);
    FFElem out = zero(M);
    for (unsigned j = 0; j < d; ++j)
      if (a.coords()[j] != 0) {
        std::vector<unsigned> scaled(pows[j].coords());
        for (auto& x : scaled) x = ffdetail::mulm(x, a.coords()[j], p_);
        out = out + FFElem(field(M), std::move(scaled));
      }
    return out;
  }

  /// Puts a and b in their smallest common field along divisibility.
  std::pair<FFElem, FFElem> coerce(const FFElem& a, const FFElem& b) {
    if (a.field() == b.field()) return {a, b};
    const unsigned da = a.degree(), db = b.degree();
    if (db % da == 0) return {embed(a, db), b};
    if (da % db == 0) return {a, embed(b, da)};
    throw Error("incompatible finite fields (neither degree divides the other)");
  }

  /// Puts a and b in the compositum F_{p^lcm}; grows the tower as needed.
  std::pair<FFElem, FFElem> join(const FFElem& a, const FFElem& b) {
    const unsigned M = static_cast<unsigned>(std::lcm(a.degree(), b.degree()));
    return {embed(a, M), embed(b, M)};
  }

  /// Least k >= 1 with a^k = 1; divides p^m - 1.
  BigInt mult_order(const FFElem& a) {
    if (a.is_zero()) throw Error("multiplicative order of zero");
    BigInt o = a.field()->card_minus_1;
    for (const BigInt& l : a.field()->card_prime_factors)
      while (o % l == 0 && a.pow(o / l).is_one()) o /= l;
    return o;
  }

  /// Smallest d >= 1 with a in F_{q^d}, q = p^e. (a^(q^d) = a.)
  unsigned degree_over(const FFElem& a, unsigned e) {
    FFElem b = a;
    for (unsigned d = 1; d <= a.degree(); ++d) {
      for (unsigned i = 0; i < e; ++i) b = b.frobenius();
      if (b == a) return d;
    }
    throw Error("degree_over: no fixed power found");  // unreachable for valid towers
  }

  /// Minimal polynomial of a over F_p, monic, little-endian.
  std::vector<unsigned> minpoly(const FFElem& a) const {
    const unsigned m = a.degree();
    const unsigned p = p_;
    // Krylov sequence 1, a, a^2, ... reduced against an echelon basis; the
    // first dependent power yields the minimal polynomial.
    std::vector<std::vector<unsigned>> basis;           // echelon rows (length m)
    std::vector<std::vector<unsigned>> combos;          // expression of rows in powers
    std::vector<int> pivot_of_row;
    std::vector<unsigned> pw(m, 0);
    pw[0] = 1;
    const auto& f = a.field()->poly;
    for (unsigned k = 0;; ++k) {
      std::vector<unsigned> v = pw;
      std::vector<unsigned> combo(k + 1, 0);
      combo[k] = 1;
      for (size_t r = 0; r < basis.size(); ++r) {
        const int piv = pivot_of_row[r];
        if (piv >= 0 && v[piv] != 0) {
          const unsigned c = ffdetail::mulm(v[piv], ffdetail::invm(basis[r][piv], p), p);
          for (unsigned j = 0; j < m; ++j) v[j] = ffdetail::subm(v[j], ffdetail::mulm(c, basis[r][j], p), p);
          if (combo.size() < combos[r].size()) combo.resize(combos[r].size(), 0);
          for (size_t j = 0; j < combos[r].size(); ++j)
            combo[j] = ffdetail::subm(combo[j], ffdetail::mulm(c, combos[r][j], p), p);
        }
      }
      int piv = -1;
      for (unsigned j = 0; j < m; ++j)
        if (v[j] != 0) {
          piv = static_cast<int>(j);
          break;
        }
      if (piv < 0) {
        // dependent: combo encodes sum combo[j] * a^j = 0, with combo[k] = 1
        ffdetail::trim(combo);
        const unsigned lead_inv = ffdetail::invm(combo.back(), p);
        for (auto& c : combo) c = ffdetail::mulm(c, lead_inv, p);
        return combo;
      }
      basis.push_back(v);
      combos.push_back(combo);
      pivot_of_row.push_back(piv);
      pw = ffdetail::poly_mulmod(pw, a.coords(), f, p);
      pw.resize(m, 0);
    }
  }

 private:
  const std::vector<FFElem>& embed_powers(unsigned d, unsigned M) {
    const auto key = std::make_pair(d, M);
    auto it = embed_cache_.find(key);
    if (it != embed_cache_.end()) return it->second;
    auto fd = field(d);
    auto fM = field(M);
    const BigInt exp = fM->card_minus_1 / fd->card_minus_1;
    FFElem g = gen(M).pow(exp);
    std::vector<FFElem> pows;
    pows.reserve(d);
    FFElem cur = one(M);
    for (unsigned j = 0; j < d; ++j) {
      pows.push_back(cur);
      cur = cur * g;
    }
    return embed_cache_.emplace(key, std::move(pows)).first->second;
  }

  void build(unsigned m) {
    using namespace ffdetail;
    if (m == 1) {
      unsigned g = 1;
      if (p_ > 2) {
        auto factors = prime_factors(BigInt(p_ - 1));
        for (g = 2; g < p_; ++g) {
          bool primitive = true;
          for (const BigInt& l : factors) {
            BigInt e = BigInt(p_ - 1) / l;
            // g^e mod p
            BigInt acc = 1, base = g, ee = e;
            while (ee > 0) {
              if ((ee & 1) != 0) acc = acc * base % p_;
              base = base * base % p_;
              ee >>= 1;
            }
            if (acc == 1) {
              primitive = false;
              break;
            }
          }
          if (primitive) break;
        }
      }
      register_field(1, {subm(0, g, p_), 1});
      return;
    }
    for (unsigned d = 1; d < m; ++d)
      if (m % d == 0) field(d);

    // working modulus: first irreducible monic polynomial of degree m
    Poly h;
    for (std::uint64_t counter = 1;; ++counter) {
      Poly cand;
      std::uint64_t k = counter;
      for (unsigned i = 0; i < m; ++i) {
        cand.push_back(static_cast<unsigned>(k % p_));
        k /= p_;
      }
      if (k != 0) throw Error("no irreducible polynomial found");  // unreachable
      if (cand[0] == 0) continue;
      cand.push_back(1);
      if (poly_irreducible(cand, p_)) {
        h = cand;
        break;
      }
    }

    const BigInt card_m1 = int_pow(p_, m) - 1;
    const auto factors = prime_factors(card_m1);
    std::vector<unsigned> max_subdegrees;
    for (unsigned l = 2; l <= m; ++l)
      if (m % l == 0) {
        bool lp = true;
        for (unsigned d = 2; d * d <= l; ++d)
          if (l % d == 0) lp = false;
        if (lp) max_subdegrees.push_back(m / l);
      }

    auto working_field = std::make_shared<Field>();
    working_field->p = p_;
    working_field->m = m;
    working_field->poly = h;
    working_field->card_minus_1 = card_m1;
    working_field->card_prime_factors = factors;
    working_field->tower = this;

    // compatible generator search, deterministic base-p order
    const BigInt card = card_m1 + 1;
    for (BigInt counter = 1; counter < card; ++counter) {
      std::vector<unsigned> coords;
      BigInt k = counter;
      while (k != 0) {
        coords.push_back(static_cast<unsigned>(k % p_));
        k /= p_;
      }
      FFElem xi(working_field, std::move(coords));
      bool primitive = true;
      for (const BigInt& l : factors)
        if (xi.pow(card_m1 / l).is_one()) {
          primitive = false;
          break;
        }
      if (!primitive) continue;
      bool compatible = true;
      for (unsigned d : max_subdegrees) {
        FFElem zeta = xi.pow(card_m1 / fields_.at(d)->card_minus_1);
        if (minpoly(zeta) != fields_.at(d)->poly) {
          compatible = false;
          break;
        }
      }
      if (!compatible) continue;
      register_field(m, minpoly(xi));
      return;
    }
    throw Error("no compatible generator found for degree " + std::to_string(m));
  }

  void register_field(unsigned m, std::vector<unsigned> poly) {
    auto f = std::make_shared<Field>();
    f->p = p_;
    f->m = m;
    f->poly = std::move(poly);
    f->card_minus_1 = int_pow(p_, m) - 1;
    f->card_prime_factors = ffdetail::prime_factors(f->card_minus_1);
    f->tower = this;
    fields_[m] = std::move(f);
  }

  unsigned p_;
  BigInt cap_;
  std::map<unsigned, std::shared_ptr<const Field>> fields_;
  std::map<std::pair<unsigned, unsigned>, std::vector<FFElem>> embed_cache_;
};

inline FFElem operator+(const FFElem& a, const FFElem& b) {
  auto [x, y] = a.f_->tower->coerce(a, b);
  std::vector<unsigned> out(x.c_.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = ffdetail::addm(x.c_[i], y.c_[i], x.p());
  return FFElem(x.f_, std::move(out));
}

inline FFElem operator-(const FFElem& a, const FFElem& b) { return a + b.negated(); }

inline FFElem operator*(const FFElem& a, const FFElem& b) {
  auto [x, y] = a.f_->tower->coerce(a, b);
  auto prod = ffdetail::poly_mulmod(x.c_, y.c_, x.f_->poly, x.p());
  return FFElem(x.f_, std::move(prod));
}

inline bool operator==(const FFElem& a, const FFElem& b) {
  if (a.f_ == nullptr || b.f_ == nullptr) return a.f_ == b.f_;
  if (a.f_->tower != b.f_->tower) return false;
  auto [x, y] = a.f_->tower->join(a, b);
  return x.c_ == y.c_;
}

/// |GL(n, F_q)| = prod_{k=0}^{n-1} (q^n - q^k).
inline BigInt gl_order(unsigned n, const BigInt& q) {
  if (n < 1 || q < 2) throw Error("gl_order: need n >= 1 and q >= 2");
  const BigInt qn = [&] {
    BigInt out = 1;
    for (unsigned i = 0; i < n; ++i) out *= q;
    return out;
  }();
  BigInt out = 1, qk = 1;
  for (unsigned k = 0; k < n; ++k) {
    out *= qn - qk;
    qk *= q;
  }
  return out;
}

}  // namespace dmspec
