#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fnov {

/// A discretized function on the periodic grid. Length must match the Grid
/// it is used with; every operation that takes both checks this.
using Field = Eigen::VectorXd;

struct Grid {
  int n_points = 0;
  double domain_length = 1.0;

  Grid() = default;
  explicit Grid(int n) : n_points(n) {
    if (n < 4 || n % 2 != 0) throw std::invalid_argument("Grid: n_points must be even and >= 4");
  }

  double spacing() const { return domain_length / n_points; }
  int size() const { return n_points; }

  void check(const Field& u, const char* where) const {
    if (u.size() != n_points) {
      throw std::invalid_argument(std::string(where) + ": field length " + std::to_string(u.size()) +
                                  " does not match grid size " + std::to_string(n_points));
    }
  }
};

/// Discrete mass (1/N) sum u_i.
template <typename Derived>
typename Derived::Scalar mass(const Eigen::MatrixBase<Derived>& u) {
  return u.mean();
}

}  // namespace fnov
