#include "fnov/constraints.hpp"

#include <algorithm>
#include <cmath>

namespace fnov {

namespace {
constexpr int kMaxProjectionPasses = 50;
// Pairs are shrunk to slightly inside the bound so rounding in the midpoint
// arithmetic cannot push them back out.
constexpr double kSlopeMargin = 1.0 - 1e-9;
}  // namespace

ConstraintSet::ConstraintSet(Rational lo, Rational hi, Rational slope)
    : lower(std::move(lo)), upper(std::move(hi)), slope_bound(std::move(slope)) {
  if (!(lower < upper)) throw std::invalid_argument("ConstraintSet: lower must be < upper");
  if (sgn(slope_bound) < 0) throw std::invalid_argument("ConstraintSet: slope_bound must be >= 0");
}

ConstraintSet ConstraintSet::for_mass(int n) { return {Rational(0), Rational(5), Rational(15, n)}; }

ConstraintSet ConstraintSet::for_positivity(int n) {
  return {Rational(1, 10), Rational(5), Rational(15, n)};
}

bool is_admissible(std::span<const Rational> u, const ConstraintSet& c) {
  const std::size_t n = u.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (u[i] < c.lower || u[i] > c.upper) return false;
    if (abs(u[(i + 1) % n] - u[i]) > c.slope_bound) return false;
  }
  return true;
}

bool is_admissible(const Field& u, const ConstraintSet& c) {
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i])) return false;
  }
  std::vector<Rational> exact;
  exact.reserve(static_cast<std::size_t>(u.size()));
  for (Eigen::Index i = 0; i < u.size(); ++i) exact.push_back(rationalize(u[i]));
  return is_admissible(std::span<const Rational>(exact), c);
}

Field project_feasible(const Field& u, const ConstraintSet& c) {
  if (is_admissible(u, c)) return u;

  const double lo = c.lower_d();
  const double hi = c.upper_d();
  const double slope = c.slope_d() * kSlopeMargin;
  const Eigen::Index n = u.size();

  Field v = u;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(v[i])) v[i] = 0.5 * (lo + hi);
  }
  for (int pass = 0; pass < kMaxProjectionPasses; ++pass) {
    v = v.cwiseMax(lo).cwiseMin(hi);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index j = (i + 1) % n;
      const double diff = v[j] - v[i];
      if (std::abs(diff) > slope) {
        const double mid = 0.5 * (v[i] + v[j]);
        const double half = 0.5 * std::copysign(slope, diff);
        v[i] = mid - half;
        v[j] = mid + half;
      }
    }
    v = v.cwiseMax(lo).cwiseMin(hi);
    if (is_admissible(v, c)) return v;
  }

  double level = u.allFinite() ? u.mean() : 0.5 * (lo + hi);
  return Field::Constant(n, std::clamp(level, lo, hi));
}

}  // namespace fnov
