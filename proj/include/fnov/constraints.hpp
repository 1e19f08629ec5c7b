#pragma once

#include "fnov/grid.hpp"
#include "fnov/rational.hpp"

#include <span>
#include <vector>

namespace fnov {

/// Admissible input set: box [lower, upper]^N intersected with the cyclic
/// slope bound |u_{i+1} - u_i| <= slope_bound (wrap-around pair included).
/// Bounds are held as exact rationals; the double accessors round inward so
/// that any double field that passes them also passes the rational check.
struct ConstraintSet {
  Rational lower;
  Rational upper;
  Rational slope_bound;

  ConstraintSet(Rational lo, Rational hi, Rational slope);

  /// Box [0, 5] with slope 15/N.
  static ConstraintSet for_mass(int n);
  /// Box [1/10, 5] with slope 15/N.
  static ConstraintSet for_positivity(int n);

  double lower_d() const { return round_up(lower); }
  double upper_d() const { return round_down(upper); }
  double slope_d() const { return round_down(slope_bound); }
};

/// Rational-exact membership test; doubles are converted without rounding.
bool is_admissible(const Field& u, const ConstraintSet& c);
bool is_admissible(std::span<const Rational> u, const ConstraintSet& c);

/// Heuristic projection: alternating box clipping and midpoint-preserving
/// shrinking of violating cyclic pairs, at most 50 passes, then fallback to
/// the constant field clamp(mean(u)). The result always satisfies c.
Field project_feasible(const Field& u, const ConstraintSet& c);

}  // namespace fnov
