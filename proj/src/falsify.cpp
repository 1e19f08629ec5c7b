#include "fnov/falsify.hpp"

#include "fnov/pde.hpp"

#include <chrono>
#include <random>
#include <stdexcept>

namespace fnov {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

FalsifyResult mc_falsify(const Surrogate& model, const Grid& grid, const ConstraintSet& c, PropertyKind kind, int n,
                         std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("mc_falsify: n must be >= 1");
  const auto start = Clock::now();
  FalsifyResult result;
  for (int s = 0; s < n; ++s) {
    Field u = sample_admissible(c, grid, derive_seed(seed, static_cast<std::uint64_t>(s)));
    const double sev = severity(kind, u, model(u));
    ++result.evaluations;
    if (sev > result.best_severity) {
      result.best_severity = sev;
      result.best_input = u;
    }
  }
  result.wall_time = seconds_since(start);
  return result;
}

FalsifyResult grad_falsify(const Surrogate& model, const Grid& grid, const ConstraintSet& c, PropertyKind kind,
                           const GradConfig& cfg, std::uint64_t seed) {
  if (cfg.restarts < 1 || cfg.steps < 1) throw std::invalid_argument("grad_falsify: restarts and steps must be >= 1");
  const auto start = Clock::now();
  FalsifyResult result;
  const Eigen::Index n = grid.n_points;

  auto score = [&](const Field& u) {
    ++result.evaluations;
    return severity(kind, u, model(u));
  };

  for (int r = 0; r < cfg.restarts; ++r) {
    Field u = sample_admissible(c, grid, derive_seed(seed, static_cast<std::uint64_t>(r)));
    double current = score(u);
    if (current > result.best_severity) {
      result.best_severity = current;
      result.best_input = u;
    }
    double step = cfg.step_size;

    for (int t = 0; t < cfg.steps; ++t) {
      ++result.ascent_steps;
      Field grad(n);
      Field probe = u;
      for (Eigen::Index i = 0; i < n; ++i) {
        probe[i] = u[i] + cfg.fd_step;
        const double up = severity(kind, probe, model(probe));
        probe[i] = u[i] - cfg.fd_step;
        const double down = severity(kind, probe, model(probe));
        probe[i] = u[i];
        grad[i] = (up - down) / (2.0 * cfg.fd_step);
      }
      result.evaluations += 2 * n;

      const double scale = grad.cwiseAbs().maxCoeff();
      if (!(scale > 0.0)) {
        // Flat spot: spend the step re-scoring the same point.
        score(u);
        continue;
      }
      Field candidate = project_feasible(u + step * grad / scale, c);
      const double value = score(candidate);
      if (value > result.best_severity) {
        result.best_severity = value;
        result.best_input = candidate;
      }
      if (value < current) {
        step *= 0.5;
      } else {
        u = std::move(candidate);
        current = value;
      }
    }
  }
  result.wall_time = seconds_since(start);
  return result;
}

}  // namespace fnov
