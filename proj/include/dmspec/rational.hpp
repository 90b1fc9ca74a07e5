#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dmspec {

using BigInt = boost::multiprecision::cpp_int;

/// Library-wide error type. Messages are stable and machine-matchable.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exact rational number, always in lowest terms with positive denominator.
/// Carries every valuation and base-q logarithm in the library; there is no
/// floating point anywhere in the core.
class Rational {
 public:
  Rational() : v_(0) {}
  Rational(long long n) : v_(n) {}  // NOLINT: implicit by design
  Rational(const BigInt& n) : v_(n) {}
  Rational(const BigInt& num, const BigInt& den) {
    if (den == 0) throw Error("rational with zero denominator");
    v_ = Rep(num, den);
  }

  /// Parses "num", "num/den" or "-num/den". Whitespace is not accepted.
  static Rational parse(std::string_view s) {
    auto bad = [&] { return Error("cannot parse rational: '" + std::string(s) + "'"); };
    if (s.empty()) throw bad();
    const auto slash = s.find('/');
    try {
      if (slash == std::string_view::npos) return Rational(BigInt(std::string(s)));
      BigInt num{std::string(s.substr(0, slash))};
      BigInt den{std::string(s.substr(slash + 1))};
      if (den <= 0) throw bad();
      return Rational(num, den);
    } catch (const std::exception&) {
      throw bad();
    }
  }

  BigInt num() const { return boost::multiprecision::numerator(v_); }
  BigInt den() const { return boost::multiprecision::denominator(v_); }
  bool is_integer() const { return den() == 1; }
  bool is_zero() const { return v_ == 0; }
  int sign() const { return v_ < 0 ? -1 : (v_ > 0 ? 1 : 0); }

  /// Largest integer <= *this.
  BigInt floor() const {
    BigInt q = num() / den();
    if (num() < 0 && q * den() != num()) --q;
    return q;
  }

  Rational operator-() const { return Rational(Rep(-v_), FromRep{}); }
  friend Rational operator+(const Rational& a, const Rational& b) { return Rational(Rep(a.v_ + b.v_), FromRep{}); }
  friend Rational operator-(const Rational& a, const Rational& b) { return Rational(Rep(a.v_ - b.v_), FromRep{}); }
  friend Rational operator*(const Rational& a, const Rational& b) { return Rational(Rep(a.v_ * b.v_), FromRep{}); }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.v_ == 0) throw Error("rational division by zero");
    return Rational(Rep(a.v_ / b.v_), FromRep{});
  }
  Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
  Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
  Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }

  friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
  friend bool operator!=(const Rational& a, const Rational& b) { return a.v_ != b.v_; }
  friend bool operator<(const Rational& a, const Rational& b) { return a.v_ < b.v_; }
  friend bool operator<=(const Rational& a, const Rational& b) { return a.v_ <= b.v_; }
  friend bool operator>(const Rational& a, const Rational& b) { return a.v_ > b.v_; }
  friend bool operator>=(const Rational& a, const Rational& b) { return a.v_ >= b.v_; }

  /// "num" when integral, otherwise "num/den", lowest terms.
  std::string str() const {
    std::string out = num().str();
    if (!is_integer()) out += "/" + den().str();
    return out;
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  using Rep = boost::multiprecision::cpp_rational;
  struct FromRep {};
  Rational(Rep v, FromRep) : v_(std::move(v)) {}
  Rep v_;
};

/// A rational extended with +infinity. Series valuations ("no terms up to
/// precision" reads as +infinity) and precision bounds both live here.
class Valuation {
 public:
  Valuation() : inf_(true) {}
  Valuation(Rational r) : inf_(false), v_(std::move(r)) {}  // NOLINT
  Valuation(long long n) : inf_(false), v_(n) {}            // NOLINT
  static Valuation infinity() { return Valuation(); }

  bool is_infinite() const { return inf_; }
  bool is_finite() const { return !inf_; }
  const Rational& finite() const {
    if (inf_) throw Error("valuation is +infinity");
    return v_;
  }

  friend Valuation operator+(const Valuation& a, const Valuation& b) {
    if (a.inf_ || b.inf_) return infinity();
    return Valuation(a.v_ + b.v_);
  }
  friend Valuation operator+(const Valuation& a, const Rational& b) {
    return a.inf_ ? infinity() : Valuation(a.v_ + b);
  }

  friend bool operator==(const Valuation& a, const Valuation& b) {
    if (a.inf_ != b.inf_) return false;
    return a.inf_ || a.v_ == b.v_;
  }
  friend bool operator!=(const Valuation& a, const Valuation& b) { return !(a == b); }
  friend bool operator<(const Valuation& a, const Valuation& b) {
    if (a.inf_) return false;
    if (b.inf_) return true;
    return a.v_ < b.v_;
  }
  friend bool operator<=(const Valuation& a, const Valuation& b) { return a == b || a < b; }
  friend bool operator>(const Valuation& a, const Valuation& b) { return b < a; }
  friend bool operator>=(const Valuation& a, const Valuation& b) { return b <= a; }

  static Valuation min(const Valuation& a, const Valuation& b) { return a < b ? a : b; }

  std::string str() const { return inf_ ? "inf" : v_.str(); }

 private:
  bool inf_;
  Rational v_;
};

inline BigInt lcm(const BigInt& a, const BigInt& b) {
  if (a == 0 || b == 0) return 0;
  return a / boost::multiprecision::gcd(a, b) * b;
}

/// q^k for machine-size k.
inline BigInt int_pow(const BigInt& base, unsigned k) {
  BigInt out = 1;
  for (unsigned i = 0; i < k; ++i) out *= base;
  return out;
}

}  // namespace dmspec
