#pragma once

// Planted models and independent oracles shared by the unit and acceptance
// suites. Nothing here calls into the code path it is used to check.

#include "fnov/fno.hpp"
#include "fnov/rational.hpp"
#include "fnov/solver.hpp"

#include <gmpxx.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

namespace fnov::testing {

enum class Planted { Identity, Doubling, Negation };

/// Width-2 depth-1 linear model: lifting copies u into channel 0, no spectral
/// path, identity bypass, projection reads channel 0 scaled by gain.
inline FnoModel planted_model(int n, Planted kind) {
  FnoModel m;
  m.spec = FnoSpec::make(n, 1, 0);
  const int h = m.spec.hidden_width;
  m.params.lifting_weight = Eigen::VectorXd::Zero(h);
  m.params.lifting_weight[0] = 1.0;
  m.params.lifting_bias = Eigen::VectorXd::Zero(h);
  SpectralLayer layer;
  layer.mode_weights.assign(static_cast<std::size_t>(m.spec.modes_kept), Eigen::MatrixXcd::Zero(h, h));
  layer.bypass = Eigen::MatrixXd::Identity(h, h);
  layer.bias = Eigen::VectorXd::Zero(h);
  m.params.layers.push_back(layer);
  m.params.projection_weight = Eigen::RowVectorXd::Zero(h);
  m.params.projection_weight[0] = kind == Planted::Identity ? 1.0 : kind == Planted::Doubling ? 2.0 : -1.0;
  m.reference_input = Eigen::VectorXd::Constant(n, 1.0);
  return m;
}

/// Identity model whose spectral path adds -2 M(u) to channel 0, so the
/// original can never gain mass. Frozen at u_ref = -1 the same path becomes
/// the constant +2, which the frozen net reports as a mass violation.
inline FnoModel frozen_mismatch(int n) {
  FnoModel m = planted_model(n, Planted::Identity);
  m.params.layers[0].mode_weights[0](0, 0) = -2.0;
  m.reference_input = Eigen::VectorXd::Constant(n, -1.0);
  return m;
}

/// Same channel maps, arbitrary random spectral weights and depth.
inline FnoModel random_model(int n, int depth, std::uint64_t seed, int width = 2) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  FnoModel m;
  m.spec = FnoSpec::make(n, depth, seed, width);
  auto rnd = [&](Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd x(r, c);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng) / std::sqrt(width);
    return x;
  };
  m.params.lifting_weight = rnd(width, 1);
  m.params.lifting_bias = rnd(width, 1);
  for (int l = 0; l < depth; ++l) {
    SpectralLayer layer;
    for (int k = 0; k < m.spec.modes_kept; ++k) {
      Eigen::MatrixXcd w(width, width);
      w.real() = rnd(width, width);
      w.imag() = rnd(width, width);
      layer.mode_weights.push_back(w);
    }
    layer.bypass = rnd(width, width);
    layer.bias = rnd(width, 1);
    m.params.layers.push_back(layer);
  }
  m.params.projection_weight = rnd(1, width);
  m.params.projection_bias = g(rng);
  m.reference_input = Eigen::VectorXd::Constant(n, 1.0);
  return m;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd x(rows, cols);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  return x;
}

/// Spectral convolution by the O(N^2) DFT sums, with the conjugate mirror
/// written out as an explicit Hermitian-extension of the kept modes.
inline Eigen::MatrixXd naive_spectral_conv(const std::vector<Eigen::MatrixXcd>& w, const Eigen::MatrixXd& h) {
  using C = std::complex<double>;
  const auto n = h.rows();
  const auto width = h.cols();
  const auto k_kept = static_cast<Eigen::Index>(w.size());
  Eigen::MatrixXcd hat(n, width);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index c = 0; c < width; ++c) {
      C acc = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += h(i, c) * std::polar(1.0, -2.0 * std::numbers::pi * double(k * i) / double(n));
      }
      hat(k, c) = acc;
    }
  }
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(n, width);
  for (Eigen::Index k = 0; k < k_kept; ++k) {
    Eigen::VectorXcd mixed = w[static_cast<std::size_t>(k)] * hat.row(k).transpose();
    full.row(k) = mixed.transpose();
    if (k != 0 && 2 * k != n) full.row(n - k) = mixed.conjugate().transpose();
  }
  Eigen::MatrixXd out(n, width);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < width; ++c) {
      C acc = 0;
      for (Eigen::Index k = 0; k < n; ++k) {
        acc += full(k, c) * std::polar(1.0, 2.0 * std::numbers::pi * double(k * i) / double(n));
      }
      out(i, c) = acc.real() / double(n);
    }
  }
  return out;
}

/// Constraint check written directly against GMP, independent of
/// is_admissible.
inline bool independent_admissible(const Eigen::VectorXd& u, const mpq_class& lo, const mpq_class& hi,
                                   const mpq_class& slope) {
  const auto n = u.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    mpq_class a(u[i]);  // mpq_class(double) converts exactly
    mpq_class b(u[(i + 1) % n]);
    if (a < lo || a > hi) return false;
    mpq_class d = b - a;
    if (d > slope || -d > slope) return false;
  }
  return true;
}

inline bool have_z3() { return resolve_executable("z3").has_value(); }

}  // namespace fnov::testing
