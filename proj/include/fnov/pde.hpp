#pragma once

#include "fnov/constraints.hpp"
#include "fnov/grid.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace fnov {

/// Coefficients of u_t + v u_x = D u_xx - lambda u, advanced to time T.
struct AdrParams {
  double diffusion = 0.0;
  double velocity = 0.0;
  double reaction = 0.0;
  double horizon = 1.0;

  void validate() const;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Sampling ranges for the averaged-operator dataset. Each pair draws its own
/// (D, v, lambda) uniformly; the horizon is fixed.
struct AdrRanges {
  Interval diffusion{0.01, 0.1};
  Interval velocity{-1.0, 1.0};
  Interval reaction{0.05, 0.5};
  double horizon = 0.25;

  void validate() const;
};

struct Sample {
  Field input;
  Field target;
  AdrParams params;
};

struct Dataset {
  Grid grid;
  AdrRanges ranges;
  std::uint64_t seed = 0;
  std::vector<Sample> samples;

  /// Pointwise mean of all inputs.
  Field mean_input() const;
};

/// Exact Fourier-space solution operator: mode k is multiplied by
/// exp((-D xi_k^2 - i v xi_k - lambda) T) with xi_k = 2 pi k / domain_length.
Field adr_propagate(const Grid& grid, const Field& u0, const AdrParams& p);

/// Smooth positive initial condition: random Fourier series over modes
/// <= N/4 with amplitudes ~ 1/(1+k), affinely mapped into [0.2, 2.0].
Field random_initial_condition(const Grid& grid, std::uint64_t seed);

Dataset gen_dataset(int n_samples, const Grid& grid, const AdrRanges& ranges, std::uint64_t seed);

/// Random smooth field pushed into the admissible set by project_feasible.
Field sample_admissible(const ConstraintSet& c, const Grid& grid, std::uint64_t seed);

}  // namespace fnov
