#include "fnov/smt.hpp"
#include "fnov/solver.hpp"
#include "support.hpp"

#include <doctest.h>

#include <map>

using namespace fnov;
using namespace fnov::testing;

namespace {

/// name -> (coefficient per variable, constant) for every defining equality
/// of the form (= name (+ ...)).
struct Equation {
  std::map<std::string, Rational> coeffs;
  Rational constant = 0;
  std::size_t monomials = 0;
};

std::map<std::string, Equation> read_equations(const std::string& text) {
  std::map<std::string, Equation> eqs;
  for (const auto& e : parse_sexprs_lenient(text)) {
    if (!e.is_list || e.items.size() != 2 || !e.items[0].is("assert")) continue;
    const SExpr& body = e.items[1];
    if (!body.is_list || body.items.size() != 3 || !body.items[0].is("=") || !body.items[1].is_atom()) continue;
    const SExpr& rhs = body.items[2];
    if (rhs.is_list && rhs.items[0].is("ite")) continue;
    Equation eq;
    std::vector<SExpr> terms;
    if (rhs.is_list && rhs.items[0].is("+")) {
      terms.assign(rhs.items.begin() + 1, rhs.items.end());
    } else {
      terms.push_back(rhs);
    }
    for (const auto& t : terms) {
      ++eq.monomials;
      if (t.is_list && t.items[0].is("*")) {
        eq.coeffs[t.items[2].atom] += parse_rational(t.items[1]);
      } else if (t.is_atom() && (std::isalpha(static_cast<unsigned char>(t.atom[0])) != 0)) {
        eq.coeffs[t.atom] += 1;
      } else {
        eq.constant += parse_rational(t);
      }
    }
    if (eq.constant == 0 && eq.coeffs.empty()) eq.monomials = 0;
    eqs[body.items[1].atom] = eq;
  }
  return eqs;
}

std::size_t count_asserts(const std::string& text) {
  std::size_t n = 0;
  for (std::size_t pos = text.find("(assert"); pos != std::string::npos; pos = text.find("(assert", pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("constraint block") {
  const auto c = PropertyQuery::positivity().constraints(8);
  const AssertionBlock block = encode_constraints(c, 8);
  CHECK(block.count == 32);
  CHECK(count_asserts(block.text) == 32);
  CHECK(block.text.find("(>= in_0 (/ 1 10))") != std::string::npos);
  CHECK(block.text.find("(<= in_7 5") != std::string::npos);
  CHECK(block.text.find("(<= (- in_0 in_7) (/ 15 8))") != std::string::npos);
  CHECK(block.text.find("(<= (- in_7 in_0) (/ 15 8))") != std::string::npos);

  const auto m = PropertyQuery::mass().constraints(16);
  CHECK(m.lower == 0);
  CHECK(m.slope_bound == Rational(15, 16));
}

TEST_CASE("script skeleton") {
  const PlnNet net = compile_exact(random_model(8, 1, 3));
  const SmtScript s = encode_query(net, PropertyQuery::mass().constraints(8), PropertyQuery::mass());
  CHECK(s.text.rfind("(set-info :smt-lib-version 2.6)\n(set-logic QF_LRA)", 0) == 0);
  CHECK(s.text.find("(check-sat)\n(get-value (in_0 in_1") != std::string::npos);
  CHECK(s.text.ends_with("(exit)\n"));
  CHECK(s.var_map.size() == 8);
  CHECK(s.net_provenance == Provenance::Exact);
  CHECK(count_asserts(s.text) == s.stats.assertions);
  // Mass bound eps * N = 0.05 * 8 = 2/5.
  CHECK(s.text.find(") (/ 2 5)))") != std::string::npos);

  PropertyQuery q = PropertyQuery::positivity();
  q.severity_threshold = 0.25;
  const SmtScript p = encode_query(net, q.constraints(8), q);
  CHECK(p.text.find("(< out_0 (- (/ 1 4)))") != std::string::npos);

  PropertyQuery bad = PropertyQuery::mass();
  bad.epsilon = -1.0;
  CHECK_THROWS_AS(encode_query(net, bad.constraints(8), bad), std::invalid_argument);
}

TEST_CASE("every coefficient is the exact rational of its weight") {
  for (int depth : {1, 2}) {
    const PlnNet net = compile_exact(random_model(8, depth, 70 + static_cast<unsigned>(depth)));
    EncodingStats stats;
    const AssertionBlock block = encode_net(net, &stats);
    const auto eqs = read_equations(block.text);
    CHECK(stats.relu_terms == static_cast<std::size_t>((depth - 1) * 16));
    CHECK(stats.layer_monomials.size() == net.layers.size());

    std::vector<std::string> inputs;
    for (int i = 0; i < 8; ++i) inputs.push_back(input_name(i));
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      const auto& layer = net.layers[l];
      const bool last = l + 1 == net.layers.size();
      std::vector<std::string> outputs;
      for (Eigen::Index r = 0; r < layer.rows(); ++r) {
        const std::string tag = std::to_string(l) + "_" + std::to_string(r);
        const std::string pre = last ? output_name(static_cast<int>(r)) : "z_" + tag;
        REQUIRE(eqs.count(pre) == 1);
        const Equation& eq = eqs.at(pre);
        CHECK(eq.constant == rationalize(layer.bias[r]));
        for (Eigen::Index c = 0; c < layer.cols(); ++c) {
          const auto it = eq.coeffs.find(inputs[static_cast<std::size_t>(c)]);
          const Rational got = it == eq.coeffs.end() ? Rational(0) : it->second;
          CHECK(got == rationalize(layer.weight(r, c)));
        }
        CHECK(eq.monomials <= static_cast<std::size_t>(layer.cols() + 1));
        outputs.push_back(layer.activation == Activation::Relu ? "h_" + tag : pre);
      }
      inputs = outputs;
    }
  }
}

TEST_CASE("monomial counts follow the layer structure") {
  const int n = 8, width = 2;
  const FnoModel m = random_model(n, 1, 12);
  EncodingStats exact, frozen;
  encode_net(compile_exact(m), &exact);
  encode_net(compile_frozen(m), &frozen);
  // Dense NH x NH spectral layer plus bias, versus H bypass terms plus bias.
  CHECK(exact.layer_monomials[1] == static_cast<std::size_t>(n * width * (n * width + 1)));
  CHECK(frozen.layer_monomials[1] == static_cast<std::size_t>(n * width * (width + 1)));
  CHECK(exact.hidden_monomials() == exact.layer_monomials[1]);

  // Doubling N: roughly 4x for the exact layer, exactly 2x for the frozen one.
  EncodingStats exact2, frozen2;
  const FnoModel m2 = random_model(2 * n, 1, 12);
  encode_net(compile_exact(m2), &exact2);
  encode_net(compile_frozen(m2), &frozen2);
  const double r_exact = double(exact2.hidden_monomials()) / double(exact.hidden_monomials());
  CHECK(r_exact >= 3.5);
  CHECK(r_exact <= 4.5);
  CHECK(frozen2.hidden_monomials() == 2 * frozen.hidden_monomials());
}

TEST_CASE("an all-zero net defines outputs as its bias") {
  PlnNet net;
  Eigen::VectorXd bias = Eigen::VectorXd::LinSpaced(4, -1.5, 1.5);
  net.layers.push_back({Eigen::MatrixXd::Zero(4, 4), bias, Activation::Linear});
  const auto eqs = read_equations(encode_net(net).text);
  for (int i = 0; i < 4; ++i) {
    const Equation& eq = eqs.at(output_name(i));
    CHECK(eq.coeffs.empty());
    CHECK(eq.constant == rationalize(bias[i]));
  }
}

TEST_CASE("z3 accepts generated scripts" * doctest::skip(!have_z3())) {
  // Syntax check only, so a hard query may time out; get-value after unsat
  // is the one error z3 is allowed to report.
  const FnoModel m = random_model(8, 2, 90);
  for (const PlnNet& net : {compile_exact(m), compile_frozen(m)}) {
    for (const PropertyQuery& q : {PropertyQuery::mass(), PropertyQuery::positivity()}) {
      const SolverOutcome out = run_solver(encode_query(net, q.constraints(8), q), SolverCommand::z3(), 5.0);
      INFO(std::string(to_string(out.status)), "\n", out.raw);
      CHECK(out.status != SolverStatus::Error);
      CHECK(out.status != SolverStatus::Unknown);
      std::string rest = out.raw;
      if (out.status == SolverStatus::Unsat) {
        const auto pos = rest.find("model is not available");
        if (pos != std::string::npos) rest.erase(rest.rfind("(error", pos));
      }
      CHECK(rest.find("error") == std::string::npos);
      CHECK(rest.find("WARNING") == std::string::npos);
    }
  }
}
