#pragma once

#include "fnov/grid.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace fnov {

enum class Activation { Linear, Relu };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

template <typename Scalar>
Scalar activate(Activation a, const Scalar& z) {
  if (a == Activation::Relu) return z >= Scalar(0) ? z : Scalar(0);
  return z;
}

/// Architecture of a 1D FNO: pointwise lifting to H channels, `depth` hidden
/// layers of spectral convolution plus pointwise bypass, pointwise projection.
struct FnoSpec {
  int grid_size = 8;
  int hidden_width = 2;
  int depth = 1;
  int modes_kept = 5;
  std::vector<Activation> activations{Activation::Linear};
  std::uint64_t seed = 0;

  /// Default layout: all nonnegative modes for N <= 16, N/4 beyond; depth 1
  /// is purely linear, deeper nets use ReLU on every hidden layer but the last.
  static FnoSpec make(int n, int depth, std::uint64_t seed, int hidden_width = 2);
  static int default_modes(int n);

  void validate() const;
  Grid grid() const { return Grid(grid_size); }
};

struct SpectralLayer {
  /// One H x H complex mixing matrix per retained mode k = 0..K-1,
  /// indexed (output channel, input channel).
  std::vector<Eigen::MatrixXcd> mode_weights;
  Eigen::MatrixXd bypass;  // H x H, (output, input)
  Eigen::VectorXd bias;    // H
};

struct FnoParams {
  Eigen::VectorXd lifting_weight;  // H
  Eigen::VectorXd lifting_bias;    // H
  std::vector<SpectralLayer> layers;
  Eigen::RowVectorXd projection_weight;  // H
  double projection_bias = 0.0;
};

struct FnoModel {
  FnoSpec spec;
  FnoParams params;
  /// Reference input for the frozen reduction (training-set mean); may be empty.
  Field reference_input;

  std::string name() const;
};

/// e.g. "L1-N8-s123"; widths other than 2 add an "-H<width>" tag.
std::string model_name(const FnoSpec& spec);

/// Throws std::invalid_argument when shapes disagree with the spec or any
/// weight is non-finite.
void check_params(const FnoSpec& spec, const FnoParams& params);

/// Number of real scalars in the parameter set (complex weights count twice).
int count_params(const FnoSpec& spec);

/// DFT along the grid axis of every channel, mode-wise channel mixing for
/// modes 0..K-1 mirrored onto their conjugate partners, all other modes
/// zeroed, inverse DFT, real part. h is N x H (grid rows, channel columns).
Eigen::MatrixXd spectral_conv(const std::vector<Eigen::MatrixXcd>& mode_weights, const Eigen::MatrixXd& h);

/// Pointwise lifting of a scalar field into N x H hidden state.
Eigen::MatrixXd lift(const FnoParams& params, const Field& u);

/// Pre-activation of hidden layer `l` given its input hidden state.
Eigen::MatrixXd hidden_preactivation(const SpectralLayer& layer, const Eigen::MatrixXd& h);

Field project(const FnoParams& params, const Eigen::MatrixXd& h);

/// Hidden states along the forward pass: entry 0 is the lifted input, entry
/// l+1 the output of hidden layer l.
std::vector<Eigen::MatrixXd> forward_trace(const FnoModel& model, const Field& u);

Field forward(const FnoModel& model, const Field& u);

}  // namespace fnov
