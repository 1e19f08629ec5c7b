#pragma once

#include "fnov/fno.hpp"
#include "fnov/rational.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace fnov {

struct AffineLayer {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
  Activation activation = Activation::Linear;

  Eigen::Index rows() const { return weight.rows(); }
  Eigen::Index cols() const { return weight.cols(); }
  /// Count of exactly-nonzero weight entries.
  Eigen::Index nonzeros() const { return (weight.array() != 0.0).count(); }
};

enum class Provenance { Exact, Frozen };

const char* to_string(Provenance p);

/// Dense piecewise-linear network: a chain of affine layers with per-layer
/// activation. Frozen nets carry the reference input their constants were
/// evaluated at.
struct PlnNet {
  std::vector<AffineLayer> layers;
  Provenance provenance = Provenance::Exact;
  Field reference_input;

  Eigen::Index input_dim() const { return layers.empty() ? 0 : layers.front().cols(); }
  Eigen::Index output_dim() const { return layers.empty() ? 0 : layers.back().rows(); }

  /// Throws std::invalid_argument if layer dimensions do not chain or an
  /// entry is non-finite.
  void validate() const;
};

/// Dense NH x NH matrix of the spectral convolution, probed with standard
/// basis vectors. Vectorization is column-major over the N x H hidden state:
/// index c*N + i holds h(i, c). `probe_order` permutes the order in which
/// columns are probed and must not change the result.
Eigen::MatrixXd build_spectral_matrix(const std::vector<Eigen::MatrixXcd>& mode_weights, int n, int width,
                                      std::span<const Eigen::Index> probe_order = {});

/// kron(bypass, I_N): the pointwise channel map in vectorized form.
Eigen::MatrixXd bypass_matrix(const Eigen::MatrixXd& bypass, int n);

PlnNet compile_exact(const FnoModel& model);

/// Spectral contribution of each hidden layer replaced by its value along the
/// forward trajectory of u_ref, folded into the bias.
PlnNet compile_frozen(const FnoModel& model, const Field& u_ref);

/// Frozen reduction at the model's stored reference input.
PlnNet compile_frozen(const FnoModel& model);

Field eval_pln(const PlnNet& net, const Field& u);

/// Exact evaluation with every binary64 weight rationalized.
std::vector<Rational> eval_pln_exact(const PlnNet& net, std::span<const Rational> u);

/// For an all-linear net, the single affine map out = A u + d it composes to.
std::optional<std::pair<Eigen::MatrixXd, Eigen::VectorXd>> collapse_affine(const PlnNet& net);

}  // namespace fnov
