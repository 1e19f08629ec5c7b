#include "fnov/model_io.hpp"
#include "fnov/pln.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>

using namespace fnov;
using namespace fnov::testing;

namespace {

Eigen::VectorXd vec(const Eigen::MatrixXd& h) { return Eigen::Map<const Eigen::VectorXd>(h.data(), h.size()); }

std::vector<Rational> exact_of(const Field& u) {
  std::vector<Rational> r;
  for (double x : u) r.push_back(rationalize(x));
  return r;
}

}  // namespace

TEST_CASE("spectral matrix reproduces the convolution") {
  const int n = 8, width = 2;
  SUBCASE("identity and zero mixing") {
    std::vector<Eigen::MatrixXcd> id(n / 2 + 1, Eigen::MatrixXcd::Identity(width, width));
    CHECK((build_spectral_matrix(id, n, width) - Eigen::MatrixXd::Identity(n * width, n * width))
              .lpNorm<Eigen::Infinity>() < 1e-13);
    std::vector<Eigen::MatrixXcd> zero(3, Eigen::MatrixXcd::Zero(width, width));
    CHECK(build_spectral_matrix(zero, n, width).isZero(0.0));
  }

  SUBCASE("random weights and states") {
    const FnoModel m = random_model(16, 1, 8);
    const auto& w = m.params.layers[0].mode_weights;
    const Eigen::MatrixXd mat = build_spectral_matrix(w, 16, width);
    std::mt19937_64 rng(9);
    for (int t = 0; t < 100; ++t) {
      const Eigen::MatrixXd h = random_matrix(16, width, rng);
      CHECK((mat * vec(h) - vec(spectral_conv(w, h))).lpNorm<Eigen::Infinity>() < 1e-12);
    }

    std::vector<Eigen::Index> order(32);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    CHECK(build_spectral_matrix(w, 16, width, order) == mat);
    std::vector<Eigen::Index> short_order(5, 0);
    CHECK_THROWS_AS(build_spectral_matrix(w, 16, width, short_order), std::invalid_argument);
  }
}

TEST_CASE("exact compilation agrees with the FFT forward pass") {
  for (int depth : {1, 2}) {
    const FnoModel m = random_model(8, depth, 20 + static_cast<unsigned>(depth));
    const PlnNet net = compile_exact(m);
    net.validate();
    CHECK(net.layers.size() == static_cast<std::size_t>(depth + 2));
    CHECK(net.provenance == Provenance::Exact);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> box(0.0, 5.0);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      Field u(8);
      for (auto& x : u) x = box(rng);
      worst = std::max(worst, (eval_pln(net, u) - forward(m, u)).lpNorm<Eigen::Infinity>());
    }
    CHECK(worst < 1e-10);

    Field u = Field::LinSpaced(8, 0.5, 2.0);
    const auto exact = eval_pln_exact(net, exact_of(u));
    const Field approx = eval_pln(net, u);
    for (int i = 0; i < 8; ++i) CHECK(std::abs(to_double(exact[i]) - approx[i]) < 1e-12);
  }
}

TEST_CASE("nonzero structure of compiled layers") {
  const int n = 8, width = 2;
  const FnoModel m = random_model(n, 1, 31);
  const PlnNet exact = compile_exact(m);
  const PlnNet frozen = compile_frozen(m);
  CHECK(exact.layers[1].nonzeros() == (n * width) * (n * width));
  CHECK(frozen.layers[1].nonzeros() == n * width * width);
  CHECK(exact.layers[0].nonzeros() == n * width);
  CHECK(exact.layers[2].nonzeros() == n * width);
}

TEST_CASE("frozen reduction") {
  const FnoModel m = random_model(16, 2, 40);
  const Field u_ref = Field::LinSpaced(16, 1.0, 3.0);
  const PlnNet frozen = compile_frozen(m, u_ref);
  CHECK(frozen.provenance == Provenance::Frozen);
  CHECK(frozen.reference_input == u_ref);
  CHECK((eval_pln(frozen, u_ref) - forward(m, u_ref)).lpNorm<Eigen::Infinity>() < 1e-12);

  // No spectral path means nothing is frozen.
  FnoModel local = m;
  for (auto& layer : local.params.layers) {
    for (auto& w : layer.mode_weights) w.setZero();
  }
  const PlnNet a = compile_frozen(local, u_ref);
  const PlnNet b = compile_exact(local);
  const Field probe = Field::Constant(16, 0.7);
  CHECK((eval_pln(a, probe) - eval_pln(b, probe)).lpNorm<Eigen::Infinity>() < 1e-14);

  FnoModel bare = m;
  bare.reference_input.resize(0);
  CHECK_THROWS_AS(compile_frozen(bare), std::invalid_argument);
}

TEST_CASE("planted nets evaluate as expected") {
  const Field u = Field::LinSpaced(8, 0.0, 3.5);
  const PlnNet id = compile_exact(planted_model(8, Planted::Identity));
  CHECK((eval_pln(id, u) - u).lpNorm<Eigen::Infinity>() < 1e-15);

  PlnNet neg_relu;
  neg_relu.layers.push_back({-Eigen::MatrixXd::Identity(8, 8), Eigen::VectorXd::Zero(8), Activation::Relu});
  neg_relu.validate();
  CHECK(eval_pln(neg_relu, u).isZero(0.0));
  CHECK(eval_pln(neg_relu, -u) == u);

  const auto collapsed = collapse_affine(compile_exact(planted_model(8, Planted::Doubling)));
  REQUIRE(collapsed);
  CHECK((collapsed->first - 2.0 * Eigen::MatrixXd::Identity(8, 8)).isZero(0.0));
  CHECK(collapsed->second.isZero(0.0));
  // Mass gap of the doubling map is M(u), maximized at the top of the box.
  CHECK(mass(Field(collapsed->first * Field::Constant(8, 5.0))) - 5.0 == 5.0);

  CHECK_FALSE(collapse_affine(neg_relu));
}

TEST_CASE("invalid nets are rejected") {
  PlnNet net;
  CHECK_THROWS_AS(net.validate(), std::invalid_argument);
  net.layers.push_back({Eigen::MatrixXd::Zero(4, 4), Eigen::VectorXd::Zero(3), Activation::Linear});
  CHECK_THROWS_AS(net.validate(), std::invalid_argument);
  net.layers[0].bias = Eigen::VectorXd::Zero(4);
  net.layers[0].weight(0, 0) = std::nan("");
  CHECK_THROWS_AS(net.validate(), std::invalid_argument);
  CHECK_THROWS_AS(eval_pln(compile_exact(planted_model(8, Planted::Identity)), Field::Zero(7)), std::invalid_argument);
}

TEST_CASE("compiled nets round-trip through disk") {
  const FnoModel m = random_model(8, 2, 55);
  const auto dir = std::filesystem::temp_directory_path() / "fnov_pln_test";
  std::filesystem::create_directories(dir);
  for (const PlnNet& net : {compile_exact(m), compile_frozen(m)}) {
    const auto path = dir / (std::string(to_string(net.provenance)) + ".json");
    save_pln(net, path);
    const PlnNet back = load_pln(path);
    REQUIRE(back.layers.size() == net.layers.size());
    CHECK(back.provenance == net.provenance);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      CHECK(back.layers[l].weight == net.layers[l].weight);
      CHECK(back.layers[l].bias == net.layers[l].bias);
      CHECK(back.layers[l].activation == net.layers[l].activation);
    }
  }
  std::filesystem::remove_all(dir);
}
