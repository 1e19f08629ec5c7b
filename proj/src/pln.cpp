#include "fnov/pln.hpp"

#include <numeric>
#include <stdexcept>

namespace fnov {

const char* to_string(Provenance p) { return p == Provenance::Frozen ? "frozen" : "exact"; }

void PlnNet::validate() const {
  if (layers.empty()) throw std::invalid_argument("PlnNet: no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.bias.size() != layer.rows()) throw std::invalid_argument("PlnNet: bias length mismatch");
    if (l > 0 && layer.cols() != layers[l - 1].rows()) {
      throw std::invalid_argument("PlnNet: layer " + std::to_string(l) + " does not chain");
    }
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) throw std::invalid_argument("PlnNet: non-finite entry");
  }
  if (input_dim() != output_dim()) throw std::invalid_argument("PlnNet: input and output dims differ");
}

Eigen::MatrixXd build_spectral_matrix(const std::vector<Eigen::MatrixXcd>& mode_weights, int n, int width,
                                      std::span<const Eigen::Index> probe_order) {
  const Eigen::Index dim = static_cast<Eigen::Index>(n) * width;
  std::vector<Eigen::Index> order(probe_order.begin(), probe_order.end());
  if (order.empty()) {
    order.resize(static_cast<std::size_t>(dim));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
  }
  if (static_cast<Eigen::Index>(order.size()) != dim) throw std::invalid_argument("probe order has wrong length");

  Eigen::MatrixXd w(dim, dim);
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(n, width);
  for (Eigen::Index col : order) {
    basis(col % n, col / n) = 1.0;
    Eigen::MatrixXd response = spectral_conv(mode_weights, basis);
    w.col(col) = Eigen::Map<const Eigen::VectorXd>(response.data(), dim);
    basis(col % n, col / n) = 0.0;
  }
  return w;
}

Eigen::MatrixXd bypass_matrix(const Eigen::MatrixXd& bypass, int n) {
  const Eigen::Index width = bypass.rows();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(width * n, width * n);
  for (Eigen::Index j = 0; j < width; ++j) {
    for (Eigen::Index m = 0; m < width; ++m) {
      if (bypass(j, m) != 0.0) w.block(j * n, m * n, n, n).diagonal().setConstant(bypass(j, m));
    }
  }
  return w;
}

namespace {

AffineLayer lifting_layer(const FnoParams& p, int n) {
  const Eigen::Index width = p.lifting_weight.size();
  AffineLayer layer;
  layer.weight = Eigen::MatrixXd::Zero(width * n, n);
  layer.bias.resize(width * n);
  for (Eigen::Index c = 0; c < width; ++c) {
    layer.weight.block(c * n, 0, n, n).diagonal().setConstant(p.lifting_weight[c]);
    layer.bias.segment(c * n, n).setConstant(p.lifting_bias[c]);
  }
  return layer;
}

AffineLayer projection_layer(const FnoParams& p, int n) {
  const Eigen::Index width = p.projection_weight.size();
  AffineLayer layer;
  layer.weight = Eigen::MatrixXd::Zero(n, width * n);
  for (Eigen::Index c = 0; c < width; ++c) {
    layer.weight.block(0, c * n, n, n).diagonal().setConstant(p.projection_weight[c]);
  }
  layer.bias = Eigen::VectorXd::Constant(n, p.projection_bias);
  return layer;
}

Eigen::VectorXd broadcast_bias(const Eigen::VectorXd& bias, int n) {
  Eigen::VectorXd out(bias.size() * n);
  for (Eigen::Index c = 0; c < bias.size(); ++c) out.segment(c * n, n).setConstant(bias[c]);
  return out;
}

}  // namespace

PlnNet compile_exact(const FnoModel& model) {
  check_params(model.spec, model.params);
  const int n = model.spec.grid_size;
  const int width = model.spec.hidden_width;

  PlnNet net;
  net.provenance = Provenance::Exact;
  net.layers.push_back(lifting_layer(model.params, n));
  for (std::size_t l = 0; l < model.params.layers.size(); ++l) {
    const auto& src = model.params.layers[l];
    AffineLayer layer;
    layer.weight = build_spectral_matrix(src.mode_weights, n, width) + bypass_matrix(src.bypass, n);
    layer.bias = broadcast_bias(src.bias, n);
    layer.activation = model.spec.activations[l];
    net.layers.push_back(std::move(layer));
  }
  net.layers.push_back(projection_layer(model.params, n));
  return net;
}

PlnNet compile_frozen(const FnoModel& model, const Field& u_ref) {
  const auto trace = forward_trace(model, u_ref);
  const int n = model.spec.grid_size;
  const int width = model.spec.hidden_width;

  PlnNet net;
  net.provenance = Provenance::Frozen;
  net.reference_input = u_ref;
  net.layers.push_back(lifting_layer(model.params, n));
  for (std::size_t l = 0; l < model.params.layers.size(); ++l) {
    const auto& src = model.params.layers[l];
    Eigen::MatrixXd spectral = spectral_conv(src.mode_weights, trace[l]);
    AffineLayer layer;
    layer.weight = bypass_matrix(src.bypass, n);
    layer.bias = broadcast_bias(src.bias, n) + Eigen::Map<const Eigen::VectorXd>(spectral.data(), n * width);
    layer.activation = model.spec.activations[l];
    net.layers.push_back(std::move(layer));
  }
  net.layers.push_back(projection_layer(model.params, n));
  return net;
}

PlnNet compile_frozen(const FnoModel& model) {
  if (model.reference_input.size() == 0) {
    throw std::invalid_argument("compile_frozen: model carries no reference input");
  }
  return compile_frozen(model, model.reference_input);
}

Field eval_pln(const PlnNet& net, const Field& u) {
  if (u.size() != net.input_dim()) throw std::invalid_argument("eval_pln: input dimension mismatch");
  Eigen::VectorXd x = u;
  for (const auto& layer : net.layers) {
    Eigen::VectorXd z = layer.weight * x + layer.bias;
    x = layer.activation == Activation::Relu ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
  }
  return x;
}

std::vector<Rational> eval_pln_exact(const PlnNet& net, std::span<const Rational> u) {
  if (static_cast<Eigen::Index>(u.size()) != net.input_dim()) {
    throw std::invalid_argument("eval_pln_exact: input dimension mismatch");
  }
  std::vector<Rational> x(u.begin(), u.end());
  for (const auto& layer : net.layers) {
    std::vector<Rational> z(static_cast<std::size_t>(layer.rows()));
    for (Eigen::Index r = 0; r < layer.rows(); ++r) {
      Rational acc = rationalize(layer.bias[r]);
      for (Eigen::Index c = 0; c < layer.cols(); ++c) {
        const double w = layer.weight(r, c);
        if (w != 0.0) acc += rationalize(w) * x[static_cast<std::size_t>(c)];
      }
      z[static_cast<std::size_t>(r)] = activate(layer.activation, acc);
    }
    x = std::move(z);
  }
  return x;
}

std::optional<std::pair<Eigen::MatrixXd, Eigen::VectorXd>> collapse_affine(const PlnNet& net) {
  net.validate();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(net.input_dim(), net.input_dim());
  Eigen::VectorXd d = Eigen::VectorXd::Zero(net.input_dim());
  for (const auto& layer : net.layers) {
    if (layer.activation != Activation::Linear) return std::nullopt;
    a = (layer.weight * a).eval();
    d = (layer.weight * d + layer.bias).eval();
  }
  return std::make_pair(std::move(a), std::move(d));
}

}  // namespace fnov
