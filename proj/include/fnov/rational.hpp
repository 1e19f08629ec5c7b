#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

namespace fnov {

using Rational = mpq_class;

/// Exact value of a finite binary64 number as p/q with q a power of two.
/// Throws std::domain_error on NaN or infinity.
Rational rationalize(double x);

/// Rational denoted by the shortest round-trip decimal of x (0.1 -> 1/10).
/// Used for user-facing constants such as bounds and tolerances.
Rational decimal_rational(double x);

/// Parses "12", "-3", "2.5", "1e-3" or "7/2" exactly.
Rational parse_decimal(const std::string& text);

/// SMT-LIB2 real constant: 3, (/ 1 2), (- 3), (- (/ 1 2)).
std::string to_smt(const Rational& q);

/// Nearest binary64 value.
double to_double(const Rational& q);

/// Binary64 values that are guaranteed to lie on one side of q.
double round_up(const Rational& q);
double round_down(const Rational& q);

std::vector<Rational> rationalize(const std::vector<double>& xs);

}  // namespace fnov
