#pragma once

#include "fnov/constraints.hpp"
#include "fnov/fno.hpp"
#include "fnov/smt.hpp"

#include <cstdint>
#include <functional>
#include <limits>

namespace fnov {

using Surrogate = std::function<Field(const Field&)>;

struct FalsifyResult {
  Field best_input;
  double best_severity = -std::numeric_limits<double>::infinity();
  long evaluations = 0;
  long ascent_steps = 0;
  double wall_time = 0.0;
};

struct GradConfig {
  int restarts = 10;
  int steps = 100;
  double fd_step = 1e-4;
  double step_size = 0.05;
};

/// Derived seed for stream `seed`, item `index`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Best of n admissible samples by severity. Deterministic in seed.
FalsifyResult mc_falsify(const Surrogate& model, const Grid& grid, const ConstraintSet& c, PropertyKind kind, int n,
                         std::uint64_t seed);

/// Projected ascent with central finite-difference gradients (2N+1 model
/// evaluations per step). Steps follow the gradient normalized to unit
/// max-norm; the step size halves whenever a move lowers the severity.
FalsifyResult grad_falsify(const Surrogate& model, const Grid& grid, const ConstraintSet& c, PropertyKind kind,
                           const GradConfig& cfg, std::uint64_t seed);

inline Surrogate surrogate(const FnoModel& model) {
  return [&model](const Field& u) { return forward(model, u); };
}

}  // namespace fnov
