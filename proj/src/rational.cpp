#include "fnov/rational.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace fnov {

Rational rationalize(double x) {
  if (!std::isfinite(x)) throw std::domain_error("rationalize: non-finite value");
  if (x == 0.0) return Rational(0);

  int exponent = 0;
  // x = fraction * 2^exponent with 0.5 <= |fraction| < 1; scaling by 2^53
  // makes the mantissa an exact integer.
  double fraction = std::frexp(x, &exponent);
  auto mantissa = static_cast<long long>(std::ldexp(fraction, 53));
  exponent -= 53;
  while (mantissa % 2 == 0) {
    mantissa /= 2;
    ++exponent;
  }

  mpz_class num(static_cast<long>(mantissa));
  mpz_class den(1);
  if (exponent >= 0) {
    mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), static_cast<mp_bitcnt_t>(exponent));
  } else {
    mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), static_cast<mp_bitcnt_t>(-exponent));
  }
  Rational q(num, den);
  q.canonicalize();
  return q;
}

std::vector<Rational> rationalize(const std::vector<double>& xs) {
  std::vector<Rational> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(rationalize(x));
  return out;
}

Rational parse_decimal(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("parse_decimal: empty string");
  if (auto slash = text.find('/'); slash != std::string::npos) {
    Rational q(parse_decimal(text.substr(0, slash)) / parse_decimal(text.substr(slash + 1)));
    return q;
  }

  std::size_t pos = 0;
  bool negative = false;
  if (text[pos] == '-' || text[pos] == '+') {
    negative = text[pos] == '-';
    ++pos;
  }
  std::string digits;
  long scale = 0;
  bool seen_point = false;
  for (; pos < text.size(); ++pos) {
    char c = text[pos];
    if (c >= '0' && c <= '9') {
      digits.push_back(c);
      if (seen_point) --scale;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (digits.empty()) throw std::invalid_argument("parse_decimal: no digits in '" + text + "'");
  if (pos < text.size()) {
    if ((text[pos] != 'e' && text[pos] != 'E') || pos + 1 >= text.size()) {
      throw std::invalid_argument("parse_decimal: malformed number '" + text + "'");
    }
    long exp10 = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos + 1 + (text[pos + 1] == '+'),
                                     text.data() + text.size(), exp10);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw std::invalid_argument("parse_decimal: malformed exponent in '" + text + "'");
    }
    scale += exp10;
  }

  mpz_class num(digits, 10);
  mpz_class pow10;
  mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
  Rational q = scale >= 0 ? Rational(num * pow10) : Rational(num, pow10);
  q.canonicalize();
  return negative ? Rational(-q) : q;
}

Rational decimal_rational(double x) {
  if (!std::isfinite(x)) throw std::domain_error("decimal_rational: non-finite value");
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw std::runtime_error("decimal_rational: formatting failed");
  return parse_decimal(std::string(buf, ptr));
}

std::string to_smt(const Rational& q) {
  const bool negative = sgn(q) < 0;
  Rational magnitude = abs(q);
  std::string body = magnitude.get_den() == 1
                         ? magnitude.get_num().get_str()
                         : "(/ " + magnitude.get_num().get_str() + " " + magnitude.get_den().get_str() + ")";
  return negative ? "(- " + body + ")" : body;
}

double to_double(const Rational& q) {
  // mpq_get_d truncates; go through mpfr-free correctly rounded path via
  // candidate neighbours.
  double d = mpq_get_d(q.get_mpq_t());
  double best = d;
  Rational best_err = abs(rationalize(d) - q);
  for (double c : {std::nextafter(d, -INFINITY), std::nextafter(d, INFINITY)}) {
    if (!std::isfinite(c)) continue;
    Rational err = abs(rationalize(c) - q);
    if (err < best_err) {
      best = c;
      best_err = err;
    }
  }
  return best;
}

double round_up(const Rational& q) {
  double d = to_double(q);
  return rationalize(d) >= q ? d : std::nextafter(d, INFINITY);
}

double round_down(const Rational& q) {
  double d = to_double(q);
  return rationalize(d) <= q ? d : std::nextafter(d, -INFINITY);
}

}  // namespace fnov
