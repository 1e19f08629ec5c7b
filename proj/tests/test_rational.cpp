#include "fnov/rational.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fnov;

TEST_CASE("rationalize returns the exact binary64 value") {
  CHECK(rationalize(0.5) == Rational(1, 2));
  CHECK(rationalize(-3.0) == Rational(-3));
  CHECK(rationalize(0.0) == Rational(0));

  // Oracle: GMP's exact double conversion.
  const Rational tenth = rationalize(0.1);
  CHECK(tenth == Rational(0.1));
  CHECK(tenth.get_num() == mpz_class("3602879701896397"));
  CHECK(tenth.get_den() == mpz_class("36028797018963968"));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-1060, 1000);
  for (int i = 0; i < 500; ++i) {
    const double x = std::ldexp(mant(rng), expo(rng));
    const Rational q = rationalize(x);
    CHECK(q == Rational(x));
    // Denominator is a power of two.
    mpz_class den = q.get_den();
    CHECK(mpz_popcount(den.get_mpz_t()) == 1);
  }
}

TEST_CASE("rationalize rejects non-finite input") {
  CHECK_THROWS_AS(rationalize(NAN), std::domain_error);
  CHECK_THROWS_AS(rationalize(INFINITY), std::domain_error);
}

TEST_CASE("decimal constants keep their written value") {
  CHECK(decimal_rational(0.1) == Rational(1, 10));
  CHECK(decimal_rational(0.05) == Rational(1, 20));
  CHECK(decimal_rational(5.0) == Rational(5));
  CHECK(parse_decimal("2.5") == Rational(5, 2));
  CHECK(parse_decimal("-0.125") == Rational(-1, 8));
  CHECK(parse_decimal("1e-3") == Rational(1, 1000));
  CHECK(parse_decimal("15/8") == Rational(15, 8));
  CHECK_THROWS(parse_decimal("abc"));
  CHECK_THROWS(parse_decimal("1.2.3"));
}

TEST_CASE("SMT-LIB rendering") {
  CHECK(to_smt(Rational(3)) == "3");
  CHECK(to_smt(Rational(-3)) == "(- 3)");
  CHECK(to_smt(Rational(1, 2)) == "(/ 1 2)");
  CHECK(to_smt(Rational(-7, 2)) == "(- (/ 7 2))");
}

TEST_CASE("directed rounding brackets the rational") {
  for (const Rational& q : {Rational(1, 10), Rational(1, 3), Rational(-2, 7), Rational(15, 16), Rational(5)}) {
    CHECK(rationalize(round_up(q)) >= q);
    CHECK(rationalize(round_down(q)) <= q);
    CHECK(round_up(q) - round_down(q) <= std::abs(to_double(q)) * 1e-15 + 1e-300);
  }
  CHECK(round_up(Rational(1, 2)) == 0.5);
  CHECK(to_double(Rational(1, 10)) == 0.1);
}
