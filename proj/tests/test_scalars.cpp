#include "dmspec/finite_field.hpp"
#include "dmspec/rational.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <random>
#include <set>
#include <vector>

using namespace dmspec;

TEST_CASE("rationals stay in lowest terms and compare exactly") {
  Rational a(BigInt(6), BigInt(4));
  CHECK(a.num() == 3);
  CHECK(a.den() == 2);
  CHECK(a == Rational(BigInt(3), BigInt(2)));
  CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
  CHECK(Rational(-7, 2).floor() == -4);
  CHECK(Rational(7, 2).floor() == 3);
  CHECK(Rational(-4, 2).floor() == -2);
  CHECK(Rational::parse("13/4").str() == "13/4");
  CHECK(Rational::parse("-5").str() == "-5");
  CHECK_THROWS_AS(Rational::parse("1/0"), Error);
  CHECK_THROWS_AS(Rational::parse("x"), Error);
}

TEST_CASE("valuation ordering treats infinity as largest") {
  CHECK(Valuation::infinity() > Valuation(Rational(1000)));
  CHECK(Valuation(Rational(1)) < Valuation(Rational(2)));
  CHECK(Valuation::infinity() == Valuation::infinity());
  CHECK((Valuation(Rational(1)) + Valuation(Rational(2))) == Valuation(Rational(3)));
  CHECK((Valuation::infinity() + Valuation(Rational(2))).is_infinite());
}

TEST_CASE("field arithmetic in small fields") {
  FieldTower tw(2);
  SECTION("F_2: 1 + 1 = 0") {
    CHECK((tw.one(1) + tw.one(1)).is_zero());
  }
  SECTION("F_4: w * w^2 = 1") {
    FFElem w = tw.gen(2);
    CHECK((w * (w * w)).is_one());
  }
  SECTION("F_8: frobenius(g) = g^2") {
    FFElem g = tw.gen(3);
    CHECK(g.frobenius() == g * g);
  }
  SECTION("inverse of zero fails") {
    CHECK_THROWS_WITH(tw.zero(2).inverse(), "division by zero in finite field");
  }
  SECTION("incompatible degrees refuse to mix in plain arithmetic") {
    CHECK_THROWS_AS(tw.coerce(tw.gen(2), tw.gen(3)), Error);
  }
}

TEST_CASE("multiplicative orders") {
  FieldTower tw(2);
  CHECK(tw.mult_order(tw.one(1)) == 1);
  CHECK(tw.mult_order(tw.gen(2)) == 3);
  CHECK(tw.mult_order(tw.gen(3)) == 7);
  CHECK_THROWS_AS(tw.mult_order(tw.zero(2)), Error);

  SECTION("order by exhaustive powering agrees, fields up to 64 elements") {
    for (unsigned m = 1; m <= 6; ++m) {
      const std::uint64_t card = 1ull << m;
      for (std::uint64_t k = 1; k < card; ++k) {
        FFElem a = tw.element(m, k);
        const BigInt o = tw.mult_order(a);
        CHECK((card - 1) % static_cast<std::uint64_t>(o) == 0);
        FFElem pw = a;
        BigInt steps = 1;
        while (!pw.is_one()) {
          pw = pw * a;
          ++steps;
          REQUIRE(steps <= BigInt(card - 1));
        }
        CHECK(steps == o);
      }
    }
  }
}

TEST_CASE("gl_order closed form") {
  CHECK(gl_order(1, 2) == 1);
  CHECK(gl_order(2, 2) == 6);
  CHECK(gl_order(2, 3) == 48);
  CHECK_THROWS_AS(gl_order(0, 2), Error);

  SECTION("brute-force count of invertible 2x2 matrices over F_2") {
    FieldTower tw(2);
    unsigned count = 0;
    for (std::uint64_t bits = 0; bits < 16; ++bits) {
      FFElem a = tw.element(1, bits & 1), b = tw.element(1, (bits >> 1) & 1);
      FFElem c = tw.element(1, (bits >> 2) & 1), d = tw.element(1, (bits >> 3) & 1);
      if (!(a * d - b * c).is_zero()) ++count;
    }
    CHECK(BigInt(count) == gl_order(2, 2));
  }
}

TEST_CASE("embeddings commute with arithmetic and along chains, p = 2") {
  FieldTower tw(2);
  for (unsigned a = 1; a <= 3; ++a) {
    for (unsigned b = a; b <= 6; b += a) {
      if (b % a != 0) continue;
      const std::uint64_t card = 1ull << a;
      for (std::uint64_t i = 0; i < card; ++i)
        for (std::uint64_t j = 0; j < card; ++j) {
          FFElem x = tw.element(a, i), y = tw.element(a, j);
          CHECK(tw.embed(x * y, b) == tw.embed(x, b) * tw.embed(y, b));
          CHECK(tw.embed(x + y, b) == tw.embed(x, b) + tw.embed(y, b));
        }
    }
  }
  SECTION("triangle 1 | 2 | 6 and 1 | 3 | 6 commutes") {
    for (std::uint64_t i = 0; i < 2; ++i) {
      FFElem x = tw.element(1, i);
      CHECK(tw.embed(tw.embed(x, 2), 6) == tw.embed(x, 6));
      CHECK(tw.embed(tw.embed(x, 3), 6) == tw.embed(x, 6));
    }
    for (std::uint64_t i = 0; i < 4; ++i) {
      FFElem x = tw.element(2, i);
      CHECK(tw.embed(tw.embed(x, 2), 6) == tw.embed(x, 6));
    }
  }
}

TEST_CASE("embeddings commute with arithmetic, p = 3 sampled") {
  FieldTower tw(3);
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    FFElem x = tw.element(2, rng() % 9), y = tw.element(2, rng() % 9);
    CHECK(tw.embed(x * y, 4) == tw.embed(x, 4) * tw.embed(y, 4));
    CHECK(tw.embed(x + y, 4) == tw.embed(x, 4) + tw.embed(y, 4));
  }
}

TEST_CASE("frobenius has order m on F_(p^m)") {
  FieldTower tw(2);
  FFElem g = tw.gen(4);
  FFElem x = g;
  for (unsigned i = 0; i < 4; ++i) x = x.frobenius();
  CHECK(x == g);
  FFElem y = g;
  for (unsigned i = 0; i < 2; ++i) y = y.frobenius();
  CHECK(y != g);
}

TEST_CASE("degree_over finds the residue degree over F_q") {
  FieldTower tw(2);
  CHECK(tw.degree_over(tw.one(1), 1) == 1);
  CHECK(tw.degree_over(tw.gen(2), 1) == 2);
  CHECK(tw.degree_over(tw.embed(tw.gen(2), 4), 1) == 2);
  CHECK(tw.degree_over(tw.gen(2), 2) == 1);  // over F_4 the generator of F_4 is rational
}

TEST_CASE("element serialization: generator of F_4 is [0,1]") {
  FieldTower tw(2);
  CHECK(tw.gen(2).coords() == std::vector<unsigned>{0, 1});
  CHECK(tw.field(2)->poly.size() == 3);
}

TEST_CASE("field cap is enforced loudly") {
  FieldTower tw(2, BigInt(16));
  CHECK_THROWS_WITH(tw.field(5), Catch::Matchers::ContainsSubstring("field_cap"));
}
