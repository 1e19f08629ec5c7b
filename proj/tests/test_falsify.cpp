#include "fnov/falsify.hpp"
#include "fnov/pde.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace fnov;
using namespace fnov::testing;

TEST_CASE("projection onto the admissible set") {
  const int n = 8;
  const auto c = ConstraintSet::for_positivity(n);

  const Field over = Field::Constant(n, 9.0);
  const Field clipped = project_feasible(over, c);
  CHECK(clipped == Field::Constant(n, 5.0));

  const Field ok = Field::LinSpaced(n, 1.0, 2.0);
  REQUIRE(is_admissible(ok, c));
  CHECK(project_feasible(ok, c) == ok);

  Field spike = Field::Constant(n, 1.0);
  spike[3] = 4.5;
  REQUIRE_FALSE(is_admissible(spike, c));
  const Field repaired = project_feasible(spike, c);
  CHECK(is_admissible(repaired, c));
  CHECK(independent_admissible(repaired, c.lower, c.upper, c.slope_bound));

  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const Field wild = 10.0 * random_matrix(n, 1, rng);
    CHECK(independent_admissible(project_feasible(wild, c), c.lower, c.upper, c.slope_bound));
  }
}

TEST_CASE("admissible samples are admissible and deterministic") {
  for (int n : {8, 16, 32}) {
    const Grid g(n);
    for (const auto& c : {ConstraintSet::for_mass(n), ConstraintSet::for_positivity(n)}) {
      for (std::uint64_t s = 0; s < 50; ++s) {
        const Field u = sample_admissible(c, g, s);
        CHECK(independent_admissible(u, c.lower, c.upper, c.slope_bound));
        CHECK(u == sample_admissible(c, g, s));
      }
    }
  }
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));
}

TEST_CASE("falsifiers find the planted doubling violation") {
  const int n = 8;
  const Grid g(n);
  const FnoModel doubling = planted_model(n, Planted::Doubling);
  const auto c = ConstraintSet::for_mass(n);

  const FalsifyResult grad = grad_falsify(surrogate(doubling), g, c, PropertyKind::MassNonIncrease, GradConfig{}, 1);
  CHECK(grad.best_severity >= 4.5);
  CHECK(grad.best_severity <= 5.0 + 1e-12);
  CHECK(independent_admissible(grad.best_input, c.lower, c.upper, c.slope_bound));

  const FalsifyResult mc = mc_falsify(surrogate(doubling), g, c, PropertyKind::MassNonIncrease, 5000, 1);
  CHECK(mc.best_severity >= 2.0);
  CHECK(mc.evaluations == 5000);
  CHECK(independent_admissible(mc.best_input, c.lower, c.upper, c.slope_bound));

  const FalsifyResult again = mc_falsify(surrogate(doubling), g, c, PropertyKind::MassNonIncrease, 5000, 1);
  CHECK(again.best_input == mc.best_input);
}

TEST_CASE("the identity cannot violate positivity") {
  const int n = 8;
  const Grid g(n);
  const FnoModel id = planted_model(n, Planted::Identity);
  const auto c = ConstraintSet::for_positivity(n);
  const GradConfig cfg{3, 30, 1e-4, 0.05};
  const FalsifyResult grad = grad_falsify(surrogate(id), g, c, PropertyKind::Positivity, cfg, 2);
  CHECK(grad.best_severity <= -0.1 + 1e-12);
  const FalsifyResult mc = mc_falsify(surrogate(id), g, c, PropertyKind::Positivity, 500, 2);
  CHECK(mc.best_severity <= -0.1 + 1e-12);
}

TEST_CASE("gradient budget accounting") {
  const int n = 16;
  const Grid g(n);
  const FnoModel m = random_model(n, 2, 14);
  const GradConfig cfg{4, 25, 1e-4, 0.05};
  long calls = 0;
  const Surrogate counted = [&](const Field& u) {
    ++calls;
    return forward(m, u);
  };
  const FalsifyResult r = grad_falsify(counted, g, ConstraintSet::for_mass(n), PropertyKind::MassNonIncrease, cfg, 3);
  CHECK(r.ascent_steps == 4 * 25);
  CHECK(r.evaluations == calls);
  CHECK(r.evaluations == 4L * (1 + 25L * (2 * n + 1)));

  CHECK_THROWS_AS(grad_falsify(counted, g, ConstraintSet::for_mass(n), PropertyKind::MassNonIncrease,
                               GradConfig{0, 10, 1e-4, 0.05}, 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(mc_falsify(counted, g, ConstraintSet::for_mass(n), PropertyKind::Positivity, 0, 3),
                  std::invalid_argument);
}
