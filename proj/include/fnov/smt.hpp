#pragma once

#include "fnov/constraints.hpp"
#include "fnov/pln.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fnov {

enum class PropertyKind { MassNonIncrease, Positivity };

const char* to_string(PropertyKind k);
PropertyKind property_from_string(const std::string& s);

/// Negated-property query. Mass: M(out) - M(in) <= epsilon. Positivity:
/// min out >= 0. A severity threshold t asks for a violation of at least t
/// beyond the property boundary.
struct PropertyQuery {
  PropertyKind kind = PropertyKind::MassNonIncrease;
  double epsilon = 0.05;
  double lower = 0.1;
  std::optional<double> severity_threshold;

  static PropertyQuery mass(double epsilon = 0.05);
  static PropertyQuery positivity(double lower = 0.1);

  void validate() const;
  /// Admissible set for this query on an N-point grid.
  ConstraintSet constraints(int n) const;
  /// Severity a counterexample must strictly exceed: epsilon + t for mass,
  /// t for positivity.
  double violation_level() const;
};

/// Severity of u -> out: mass gap M(out) - M(in), or -min_i out_i.
double severity(PropertyKind kind, const Field& in, const Field& out);
Rational severity_exact(PropertyKind kind, std::span<const Rational> in, std::span<const Rational> out);

struct EncodingStats {
  std::size_t assertions = 0;
  std::size_t variables = 0;
  std::size_t relu_terms = 0;
  /// Monomials in affine equalities, one entry per net layer.
  std::vector<std::size_t> layer_monomials;

  std::size_t total_monomials() const;
  /// Layers strictly between the first and last (the spectral layers of a
  /// compiled FNO).
  std::size_t hidden_monomials() const;
};

struct AssertionBlock {
  std::string text;
  std::size_t count = 0;
};

struct SmtScript {
  std::string text;
  std::vector<std::string> var_map;
  Provenance net_provenance = Provenance::Exact;
  EncodingStats stats;
};

std::string input_name(int i);
std::string output_name(int i);

/// 2N box bounds and 2N cyclic slope bounds over in_0..in_{N-1}.
AssertionBlock encode_constraints(const ConstraintSet& c, int n);

/// Declarations and defining equalities for every layer of the net; inputs
/// are in_i, final outputs out_i. Coefficients are the exact rationals of the
/// binary64 weights and exact zeros are dropped.
AssertionBlock encode_net(const PlnNet& net, EncodingStats* stats = nullptr);

/// Complete QF_LRA script: header, input declarations, constraints, net,
/// negated property, check-sat and get-value over the inputs.
SmtScript encode_query(const PlnNet& net, const ConstraintSet& c, const PropertyQuery& q);

}  // namespace fnov
