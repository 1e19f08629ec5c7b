#include "fnov/smt.hpp"

#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fnov {

const char* to_string(PropertyKind k) { return k == PropertyKind::Positivity ? "positivity" : "mass"; }

PropertyKind property_from_string(const std::string& s) {
  if (s == "mass") return PropertyKind::MassNonIncrease;
  if (s == "positivity") return PropertyKind::Positivity;
  throw std::invalid_argument("unknown property '" + s + "' (expected mass or positivity)");
}

PropertyQuery PropertyQuery::mass(double epsilon) {
  PropertyQuery q;
  q.kind = PropertyKind::MassNonIncrease;
  q.epsilon = epsilon;
  q.lower = 0.0;
  return q;
}

PropertyQuery PropertyQuery::positivity(double lower) {
  PropertyQuery q;
  q.kind = PropertyKind::Positivity;
  q.lower = lower;
  return q;
}

void PropertyQuery::validate() const {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("PropertyQuery: epsilon must be >= 0");
  if (!(lower >= 0.0)) throw std::invalid_argument("PropertyQuery: lower must be >= 0");
  if (severity_threshold && !(*severity_threshold >= 0.0)) {
    throw std::invalid_argument("PropertyQuery: severity threshold must be >= 0");
  }
}

ConstraintSet PropertyQuery::constraints(int n) const {
  return {decimal_rational(kind == PropertyKind::Positivity ? lower : 0.0), Rational(5), Rational(15, n)};
}

double PropertyQuery::violation_level() const {
  const double t = severity_threshold.value_or(0.0);
  return kind == PropertyKind::MassNonIncrease ? epsilon + t : t;
}

double severity(PropertyKind kind, const Field& in, const Field& out) {
  if (kind == PropertyKind::MassNonIncrease) return mass(out) - mass(in);
  return -out.minCoeff();
}

Rational severity_exact(PropertyKind kind, std::span<const Rational> in, std::span<const Rational> out) {
  if (out.empty()) throw std::invalid_argument("severity_exact: empty output");
  if (kind == PropertyKind::MassNonIncrease) {
    Rational gap = std::accumulate(out.begin(), out.end(), Rational(0)) -
                   std::accumulate(in.begin(), in.end(), Rational(0));
    return gap / static_cast<long>(out.size());
  }
  Rational lowest = out.front();
  for (const auto& v : out) {
    if (v < lowest) lowest = v;
  }
  return -lowest;
}

std::size_t EncodingStats::total_monomials() const {
  return std::accumulate(layer_monomials.begin(), layer_monomials.end(), std::size_t{0});
}

std::size_t EncodingStats::hidden_monomials() const {
  if (layer_monomials.size() < 3) return total_monomials();
  return std::accumulate(layer_monomials.begin() + 1, layer_monomials.end() - 1, std::size_t{0});
}

std::string input_name(int i) { return "in_" + std::to_string(i); }
std::string output_name(int i) { return "out_" + std::to_string(i); }

namespace {

std::string declare(const std::string& name) { return "(declare-fun " + name + " () Real)\n"; }

std::string sum(const std::vector<std::string>& terms) {
  if (terms.empty()) return "0";
  if (terms.size() == 1) return terms.front();
  std::string s = "(+";
  for (const auto& t : terms) s += " " + t;
  return s + ")";
}

}  // namespace

AssertionBlock encode_constraints(const ConstraintSet& c, int n) {
  std::ostringstream os;
  const std::string lo = to_smt(c.lower);
  const std::string hi = to_smt(c.upper);
  const std::string slope = to_smt(c.slope_bound);
  for (int i = 0; i < n; ++i) {
    os << "(assert (>= " << input_name(i) << " " << lo << "))\n";
    os << "(assert (<= " << input_name(i) << " " << hi << "))\n";
  }
  for (int i = 0; i < n; ++i) {
    const std::string a = input_name(i);
    const std::string b = input_name((i + 1) % n);
    os << "(assert (<= (- " << b << " " << a << ") " << slope << "))\n";
    os << "(assert (<= (- " << a << " " << b << ") " << slope << "))\n";
  }
  return {os.str(), static_cast<std::size_t>(4 * n)};
}

AssertionBlock encode_net(const PlnNet& net, EncodingStats* stats) {
  net.validate();
  EncodingStats local;
  std::ostringstream os;
  std::size_t count = 0;

  std::vector<std::string> inputs;
  for (Eigen::Index i = 0; i < net.input_dim(); ++i) inputs.push_back(input_name(static_cast<int>(i)));

  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    const bool last = l + 1 == net.layers.size();
    const bool relu = layer.activation == Activation::Relu;
    std::vector<std::string> outputs;
    std::size_t monomials = 0;

    for (Eigen::Index r = 0; r < layer.rows(); ++r) {
      const std::string tag = std::to_string(l) + "_" + std::to_string(r);
      // Linear coordinates alias their pre-activation; the final layer's
      // post-activation is named out_r.
      const std::string pre = (last && !relu) ? output_name(static_cast<int>(r)) : "z_" + tag;
      const std::string post = relu ? (last ? output_name(static_cast<int>(r)) : "h_" + tag) : pre;

      std::vector<std::string> terms;
      for (Eigen::Index c = 0; c < layer.cols(); ++c) {
        const double w = layer.weight(r, c);
        if (w == 0.0) continue;
        const auto& x = inputs[static_cast<std::size_t>(c)];
        terms.push_back(w == 1.0 ? x : "(* " + to_smt(rationalize(w)) + " " + x + ")");
      }
      if (layer.bias[r] != 0.0) terms.push_back(to_smt(rationalize(layer.bias[r])));
      monomials += terms.size();

      os << declare(pre);
      ++local.variables;
      os << "(assert (= " << pre << " " << sum(terms) << "))\n";
      ++count;
      if (relu) {
        os << declare(post);
        ++local.variables;
        // h = max(z, 0), stated with its convex hull so the simplex core sees
        // the relaxation before any case split.
        os << "(assert (>= " << post << " 0))\n";
        os << "(assert (>= " << post << " " << pre << "))\n";
        os << "(assert (or (= " << post << " 0) (= " << post << " " << pre << ")))\n";
        count += 3;
        ++local.relu_terms;
      }
      outputs.push_back(post);
    }
    local.layer_monomials.push_back(monomials);
    inputs = std::move(outputs);
  }

  local.assertions = count;
  if (stats != nullptr) *stats = local;
  return {os.str(), count};
}

SmtScript encode_query(const PlnNet& net, const ConstraintSet& c, const PropertyQuery& q) {
  q.validate();
  net.validate();
  const int n = static_cast<int>(net.input_dim());

  SmtScript script;
  script.net_provenance = net.provenance;
  for (int i = 0; i < n; ++i) script.var_map.push_back(input_name(i));

  std::ostringstream os;
  os << "(set-info :smt-lib-version 2.6)\n(set-logic QF_LRA)\n(set-option :produce-models true)\n";
  for (const auto& v : script.var_map) os << declare(v);

  AssertionBlock box = encode_constraints(c, n);
  AssertionBlock body = encode_net(net, &script.stats);
  os << box.text << body.text;
  script.stats.variables += static_cast<std::size_t>(n);
  script.stats.assertions += box.count + 1;

  const Rational threshold = decimal_rational(q.severity_threshold.value_or(0.0));
  if (q.kind == PropertyKind::Positivity) {
    os << "(assert (or";
    for (int i = 0; i < n; ++i) os << " (< " << output_name(i) << " " << to_smt(-threshold) << ")";
    os << "))\n";
  } else {
    // (1/N)(sum out - sum in) > eps + t, scaled by N.
    const Rational bound = (decimal_rational(q.epsilon) + threshold) * n;
    std::vector<std::string> outs;
    std::vector<std::string> ins;
    for (int i = 0; i < n; ++i) {
      outs.push_back(output_name(i));
      ins.push_back(input_name(i));
    }
    os << "(assert (> (- " << sum(outs) << " " << sum(ins) << ") " << to_smt(bound) << "))\n";
  }

  os << "(check-sat)\n(get-value (";
  for (std::size_t i = 0; i < script.var_map.size(); ++i) os << (i ? " " : "") << script.var_map[i];
  os << "))\n(exit)\n";
  script.text = os.str();
  return script;
}

}  // namespace fnov
