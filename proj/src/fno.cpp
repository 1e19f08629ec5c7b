#include "fnov/fno.hpp"

#include <unsupported/Eigen/FFT>

#include <complex>
#include <stdexcept>

namespace fnov {

using Complex = std::complex<double>;

const char* to_string(Activation a) { return a == Activation::Relu ? "relu" : "linear"; }

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "linear") return Activation::Linear;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

int FnoSpec::default_modes(int n) { return n <= 16 ? n / 2 + 1 : n / 4; }

FnoSpec FnoSpec::make(int n, int depth, std::uint64_t seed, int hidden_width) {
  FnoSpec spec;
  spec.grid_size = n;
  spec.hidden_width = hidden_width;
  spec.depth = depth;
  spec.modes_kept = default_modes(n);
  spec.activations.assign(static_cast<std::size_t>(depth), Activation::Relu);
  spec.activations.back() = Activation::Linear;
  spec.seed = seed;
  spec.validate();
  return spec;
}

void FnoSpec::validate() const {
  Grid check(grid_size);
  if (hidden_width < 1) throw std::invalid_argument("FnoSpec: hidden_width must be >= 1");
  if (depth < 1) throw std::invalid_argument("FnoSpec: depth must be >= 1");
  if (modes_kept < 1 || modes_kept > grid_size / 2 + 1) {
    throw std::invalid_argument("FnoSpec: modes_kept must lie in [1, N/2 + 1]");
  }
  if (static_cast<int>(activations.size()) != depth) {
    throw std::invalid_argument("FnoSpec: one activation flag per hidden layer required");
  }
}

std::string model_name(const FnoSpec& spec) {
  std::string name = "L" + std::to_string(spec.depth) + "-N" + std::to_string(spec.grid_size);
  if (spec.hidden_width != 2) name += "-H" + std::to_string(spec.hidden_width);
  return name + "-s" + std::to_string(spec.seed);
}

std::string FnoModel::name() const { return model_name(spec); }

int count_params(const FnoSpec& spec) {
  const int h = spec.hidden_width;
  const int per_layer = 2 * spec.modes_kept * h * h + h * h + h;
  return 2 * h + spec.depth * per_layer + h + 1;
}

void check_params(const FnoSpec& spec, const FnoParams& params) {
  spec.validate();
  const Eigen::Index h = spec.hidden_width;
  auto fail = [](const std::string& what) { throw std::invalid_argument("FnoParams: " + what); };

  if (params.lifting_weight.size() != h || params.lifting_bias.size() != h) fail("lifting shape mismatch");
  if (params.projection_weight.size() != h) fail("projection shape mismatch");
  if (static_cast<int>(params.layers.size()) != spec.depth) fail("layer count mismatch");
  bool finite = params.lifting_weight.allFinite() && params.lifting_bias.allFinite() &&
                params.projection_weight.allFinite() && std::isfinite(params.projection_bias);
  for (const auto& layer : params.layers) {
    if (static_cast<int>(layer.mode_weights.size()) != spec.modes_kept) fail("spectral mode count mismatch");
    for (const auto& w : layer.mode_weights) {
      if (w.rows() != h || w.cols() != h) fail("spectral weight shape mismatch");
      finite = finite && w.allFinite();
    }
    if (layer.bypass.rows() != h || layer.bypass.cols() != h) fail("bypass shape mismatch");
    if (layer.bias.size() != h) fail("bias shape mismatch");
    finite = finite && layer.bypass.allFinite() && layer.bias.allFinite();
  }
  if (!finite) fail("non-finite weight");
}

Eigen::MatrixXd spectral_conv(const std::vector<Eigen::MatrixXcd>& mode_weights, const Eigen::MatrixXd& h) {
  const Eigen::Index n = h.rows();
  const Eigen::Index width = h.cols();
  const auto modes = static_cast<Eigen::Index>(mode_weights.size());
  if (modes < 1 || modes > n / 2 + 1) throw std::invalid_argument("spectral_conv: mode count out of range");
  for (const auto& w : mode_weights) {
    if (w.rows() != width || w.cols() != width) throw std::invalid_argument("spectral_conv: weight shape mismatch");
  }

  Eigen::FFT<double> fft;
  Eigen::MatrixXcd spectrum(n, width);
  std::vector<Complex> time(static_cast<std::size_t>(n));
  std::vector<Complex> freq;
  for (Eigen::Index c = 0; c < width; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) time[static_cast<std::size_t>(i)] = h(i, c);
    fft.fwd(freq, time);
    for (Eigen::Index k = 0; k < n; ++k) spectrum(k, c) = freq[static_cast<std::size_t>(k)];
  }

  Eigen::MatrixXcd mixed = Eigen::MatrixXcd::Zero(n, width);
  for (Eigen::Index k = 0; k < modes; ++k) {
    mixed.row(k) = (mode_weights[static_cast<std::size_t>(k)] * spectrum.row(k).transpose()).transpose();
    if (k > 0 && 2 * k != n) mixed.row(n - k) = mixed.row(k).conjugate();
  }

  Eigen::MatrixXd out(n, width);
  for (Eigen::Index c = 0; c < width; ++c) {
    for (Eigen::Index k = 0; k < n; ++k) freq[static_cast<std::size_t>(k)] = mixed(k, c);
    fft.inv(time, freq);
    for (Eigen::Index i = 0; i < n; ++i) out(i, c) = time[static_cast<std::size_t>(i)].real();
  }
  return out;
}

Eigen::MatrixXd lift(const FnoParams& params, const Field& u) {
  Eigen::MatrixXd h = u * params.lifting_weight.transpose();
  h.rowwise() += params.lifting_bias.transpose();
  return h;
}

Eigen::MatrixXd hidden_preactivation(const SpectralLayer& layer, const Eigen::MatrixXd& h) {
  Eigen::MatrixXd z = spectral_conv(layer.mode_weights, h) + h * layer.bypass.transpose();
  z.rowwise() += layer.bias.transpose();
  return z;
}

Field project(const FnoParams& params, const Eigen::MatrixXd& h) {
  Field out = h * params.projection_weight.transpose();
  out.array() += params.projection_bias;
  return out;
}

std::vector<Eigen::MatrixXd> forward_trace(const FnoModel& model, const Field& u) {
  check_params(model.spec, model.params);
  model.spec.grid().check(u, "forward");

  std::vector<Eigen::MatrixXd> states;
  states.reserve(model.params.layers.size() + 1);
  states.push_back(lift(model.params, u));
  for (std::size_t l = 0; l < model.params.layers.size(); ++l) {
    Eigen::MatrixXd z = hidden_preactivation(model.params.layers[l], states.back());
    if (model.spec.activations[l] == Activation::Relu) z = z.cwiseMax(0.0);
    states.push_back(std::move(z));
  }
  return states;
}

Field forward(const FnoModel& model, const Field& u) {
  return project(model.params, forward_trace(model, u).back());
}

}  // namespace fnov
