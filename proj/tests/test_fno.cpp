#include "fnov/fno.hpp"
#include "fnov/model_io.hpp"
#include "fnov/trainer.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cstring>
#include <json.hpp>

using namespace fnov;
using namespace fnov::testing;

namespace {

std::vector<Eigen::MatrixXcd> identity_mixing(int n, int width) {
  return std::vector<Eigen::MatrixXcd>(static_cast<std::size_t>(n / 2 + 1), Eigen::MatrixXcd::Identity(width, width));
}

bool bitwise_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

}  // namespace

TEST_CASE("spectral conv with identity mixing on every mode is the identity") {
  std::mt19937_64 rng(1);
  for (int n : {4, 8, 16, 32}) {
    const Eigen::MatrixXd h = random_matrix(n, 3, rng);
    CHECK((spectral_conv(identity_mixing(n, 3), h) - h).lpNorm<Eigen::Infinity>() < 1e-13);
  }
}

TEST_CASE("spectral conv edge cases and linearity") {
  std::mt19937_64 rng(2);
  const int n = 16, width = 2;
  FnoModel m = random_model(n, 1, 3);
  const auto& w = m.params.layers[0].mode_weights;
  const Eigen::MatrixXd h = random_matrix(n, width, rng);

  std::vector<Eigen::MatrixXcd> zero(w.size(), Eigen::MatrixXcd::Zero(width, width));
  CHECK(spectral_conv(zero, h).isZero(0.0));

  for (double alpha : {-3.5, 0.25, 7.0}) {
    CHECK((spectral_conv(w, alpha * h) - alpha * spectral_conv(w, h)).lpNorm<Eigen::Infinity>() < 1e-12);
  }

  // Oracle: direct DFT sums.
  for (int k_kept : {1, 3, 9}) {
    std::vector<Eigen::MatrixXcd> wk(w.begin(), w.begin() + k_kept);
    CHECK((spectral_conv(wk, h) - naive_spectral_conv(wk, h)).lpNorm<Eigen::Infinity>() < 1e-12);
  }

  CHECK_THROWS_AS(spectral_conv(std::vector<Eigen::MatrixXcd>(w.size(), Eigen::MatrixXcd::Zero(3, 3)), h),
                  std::invalid_argument);
  CHECK_THROWS_AS(spectral_conv(std::vector<Eigen::MatrixXcd>(10, Eigen::MatrixXcd::Zero(2, 2)), h),
                  std::invalid_argument);
}

TEST_CASE("planted models") {
  std::mt19937_64 rng(4);
  const Field u = random_matrix(8, 1, rng);
  CHECK(forward(planted_model(8, Planted::Identity), u) == u);
  CHECK(forward(planted_model(8, Planted::Doubling), u) == 2.0 * u);
  CHECK(forward(planted_model(8, Planted::Negation), u) == -u);
}

TEST_CASE("depth-1 linear model is affine") {
  std::mt19937_64 rng(5);
  const FnoModel m = random_model(16, 1, 6);
  const Field zero_out = forward(m, Field::Zero(16));
  for (int t = 0; t < 20; ++t) {
    const Field u = random_matrix(16, 1, rng), w = random_matrix(16, 1, rng);
    const double a = 0.7 * t - 3.0, b = 1.3;
    const Field lhs = forward(m, a * u + b * w) - zero_out;
    const Field rhs = a * (forward(m, u) - zero_out) + b * (forward(m, w) - zero_out);
    CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_CASE("ReLU model is affine within a fixed activation region") {
  std::mt19937_64 rng(6);
  const FnoModel m = random_model(8, 2, 7);
  int checked = 0;
  for (int t = 0; t < 50 && checked < 10; ++t) {
    const Field u = random_matrix(8, 1, rng);
    const auto trace = forward_trace(m, u);
    // Pre-activation margin bounds how far the pattern can be trusted.
    const Eigen::MatrixXd z = hidden_preactivation(m.params.layers[0], trace[0]);
    const double margin = z.cwiseAbs().minCoeff();
    if (margin < 1e-3) continue;
    const double r = margin * 1e-3;
    const Field d1 = r * random_matrix(8, 1, rng).normalized();
    const Field d2 = r * random_matrix(8, 1, rng).normalized();
    const Field base = forward(m, u);
    const Field combo = forward(m, u + 0.5 * d1 + 0.5 * d2) - base;
    const Field sep = 0.5 * (forward(m, u + d1) - base) + 0.5 * (forward(m, u + d2) - base);
    CHECK((combo - sep).lpNorm<Eigen::Infinity>() < 1e-10);
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("mass") {
  CHECK(mass(Field::Constant(7, 3.0)) == 3.0);
  CHECK(mass((Field(4) << 0, 1, 2, 3).finished()) == 1.5);
  std::mt19937_64 rng(8);
  const Field u = random_matrix(12, 1, rng), w = random_matrix(12, 1, rng);
  CHECK(mass(u + w) == doctest::Approx(mass(u) + mass(w)).epsilon(1e-14));
}

TEST_CASE("forward rejects bad shapes and non-finite weights") {
  FnoModel m = random_model(8, 1, 9);
  CHECK_THROWS_AS(forward(m, Field::Zero(16)), std::invalid_argument);
  m.params.layers[0].bypass(0, 1) = NAN;
  CHECK_THROWS_AS(forward(m, Field::Zero(8)), std::invalid_argument);
}

TEST_CASE("spec defaults and parameter count") {
  CHECK(FnoSpec::default_modes(8) == 5);
  CHECK(FnoSpec::default_modes(16) == 9);
  CHECK(FnoSpec::default_modes(32) == 8);
  const FnoSpec l2 = FnoSpec::make(8, 2, 42);
  CHECK(l2.activations == std::vector<Activation>{Activation::Relu, Activation::Linear});
  CHECK(model_name(FnoSpec::make(8, 1, 123)) == "L1-N8-s123");
  CHECK(model_name(l2) == "L2-N8-s42");
  CHECK(model_name(FnoSpec::make(32, 1, 42, 4)) == "L1-N32-H4-s42");

  // Count actual scalars in an initialized model.
  for (const auto& spec : {FnoSpec::make(8, 1, 1), FnoSpec::make(16, 2, 2), FnoSpec::make(32, 2, 3, 4)}) {
    const FnoModel m = init_random(spec);
    Eigen::Index scalars = m.params.lifting_weight.size() + m.params.lifting_bias.size() +
                           m.params.projection_weight.size() + 1;
    for (const auto& layer : m.params.layers) {
      for (const auto& w : layer.mode_weights) scalars += 2 * w.size();
      scalars += layer.bypass.size() + layer.bias.size();
    }
    CHECK(count_params(spec) == scalars);
  }

  FnoSpec bad = FnoSpec::make(8, 1, 1);
  bad.modes_kept = 6;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("model files round-trip every bit") {
  FnoModel m = random_model(16, 2, 10);
  m.params.layers[1].bias[0] = 0.1;
  m.params.projection_bias = -std::numeric_limits<double>::denorm_min();
  const FnoModel back = model_from_json(model_to_json(m));
  CHECK(back.name() == m.name());
  CHECK(bitwise_equal(back.params.lifting_weight, m.params.lifting_weight));
  CHECK(bitwise_equal(back.params.projection_weight, m.params.projection_weight));
  CHECK(std::signbit(back.params.projection_bias));
  CHECK(back.params.projection_bias == m.params.projection_bias);
  for (std::size_t l = 0; l < m.params.layers.size(); ++l) {
    CHECK(bitwise_equal(back.params.layers[l].bypass, m.params.layers[l].bypass));
    CHECK(bitwise_equal(back.params.layers[l].bias, m.params.layers[l].bias));
    for (std::size_t k = 0; k < m.params.layers[l].mode_weights.size(); ++k) {
      CHECK(back.params.layers[l].mode_weights[k] == m.params.layers[l].mode_weights[k]);
    }
  }
  CHECK(back.reference_input == m.reference_input);
  CHECK(hexfloat(0.1) == "0x1.999999999999ap-4");
  CHECK(parse_hexfloat(hexfloat(-2.5)) == -2.5);
}

TEST_CASE("malformed model files are rejected") {
  const FnoModel m = random_model(8, 1, 11);
  auto j = nlohmann::json::parse(model_to_json(m));
  j["layers"][0]["bypass"].erase(0);
  CHECK_THROWS_WITH_AS(model_from_json(j.dump()), doctest::Contains("shape mismatch"), std::runtime_error);

  auto k = nlohmann::json::parse(model_to_json(m));
  k["spec"]["modes_kept"] = 4;
  CHECK_THROWS_AS(model_from_json(k.dump()), std::runtime_error);

  CHECK_THROWS_AS(model_from_json("{not json"), std::runtime_error);
  CHECK_THROWS_AS(model_from_json("{}"), std::runtime_error);
  CHECK_THROWS_AS(parse_hexfloat("0x1.8p+1junk"), std::runtime_error);
}
