#include "fnov/model_io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fnov {

using nlohmann::json;

std::string hexfloat(double x) {
  if (!std::isfinite(x)) throw std::domain_error("hexfloat: non-finite value");
  char buf[64];
  const bool negative = std::signbit(x);
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), std::abs(x), std::chars_format::hex);
  if (ec != std::errc()) throw std::runtime_error("hexfloat: formatting failed");
  return std::string(negative ? "-0x" : "0x") + std::string(buf, ptr);
}

double parse_hexfloat(const std::string& s) {
  if (s.size() < 3) throw std::runtime_error("malformed hex float '" + s + "'");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) throw std::runtime_error("malformed hex float '" + s + "'");
  return v;
}

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spill(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text << '\n';
}

template <typename Derived>
json tensor(const Eigen::DenseBase<Derived>& m) {
  // Row-major flattening.
  json arr = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) arr.push_back(hexfloat(m(r, c)));
  }
  return arr;
}

std::vector<double> values(const json& j, std::size_t expected, const std::string& what) {
  if (!j.is_array()) throw std::runtime_error(what + ": expected an array");
  if (j.size() != expected) {
    throw std::runtime_error("shape mismatch in " + what + ": expected " + std::to_string(expected) +
                             " entries, found " + std::to_string(j.size()));
  }
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& v : j) out.push_back(parse_hexfloat(v.get<std::string>()));
  return out;
}

Eigen::MatrixXd matrix(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  auto v = values(j, static_cast<std::size_t>(rows * cols), what);
  return Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(v.data(), rows, cols);
}

Eigen::VectorXd vector(const json& j, Eigen::Index n, const std::string& what) { return matrix(j, n, 1, what); }

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string model_to_json(const FnoModel& model) {
  check_params(model.spec, model.params);
  const auto& s = model.spec;
  const auto& p = model.params;

  json acts = json::array();
  for (auto a : s.activations) acts.push_back(to_string(a));

  json layers = json::array();
  for (const auto& layer : p.layers) {
    json spectral = json::array();
    for (const auto& w : layer.mode_weights) {
      spectral.push_back({{"re", tensor(w.real())}, {"im", tensor(w.imag())}});
    }
    layers.push_back({{"spectral", std::move(spectral)},
                      {"bypass", tensor(layer.bypass)},
                      {"bias", tensor(layer.bias)}});
  }

  json j;
  j["format"] = "fnov-model/1";
  j["name"] = model.name();
  j["spec"] = {{"grid_size", s.grid_size},   {"hidden_width", s.hidden_width}, {"depth", s.depth},
               {"modes_kept", s.modes_kept}, {"activations", acts},            {"seed", s.seed}};
  j["lifting"] = {{"weight", tensor(p.lifting_weight)}, {"bias", tensor(p.lifting_bias)}};
  j["layers"] = std::move(layers);
  j["projection"] = {{"weight", tensor(p.projection_weight)}, {"bias", hexfloat(p.projection_bias)}};
  if (model.reference_input.size() > 0) j["reference_input"] = tensor(model.reference_input);
  return j.dump(1);
}

FnoModel model_from_json(const std::string& text) {
  json j = parse_json(text);
  try {
    FnoModel m;
    const auto& s = j.at("spec");
    m.spec.grid_size = s.at("grid_size").get<int>();
    m.spec.hidden_width = s.at("hidden_width").get<int>();
    m.spec.depth = s.at("depth").get<int>();
    m.spec.modes_kept = s.at("modes_kept").get<int>();
    m.spec.activations.clear();
    for (const auto& a : s.at("activations")) m.spec.activations.push_back(activation_from_string(a.get<std::string>()));
    m.spec.seed = s.at("seed").get<std::uint64_t>();
    m.spec.validate();

    const Eigen::Index h = m.spec.hidden_width;
    const int n = m.spec.grid_size;
    auto& p = m.params;
    p.lifting_weight = vector(j.at("lifting").at("weight"), h, "lifting.weight");
    p.lifting_bias = vector(j.at("lifting").at("bias"), h, "lifting.bias");

    const auto& layers = j.at("layers");
    if (static_cast<int>(layers.size()) != m.spec.depth) throw std::runtime_error("shape mismatch: layer count");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const std::string tag = "layers[" + std::to_string(l) + "]";
      SpectralLayer layer;
      const auto& spectral = layers[l].at("spectral");
      if (static_cast<int>(spectral.size()) != m.spec.modes_kept) {
        throw std::runtime_error("shape mismatch in " + tag + ".spectral: mode count");
      }
      for (const auto& w : spectral) {
        Eigen::MatrixXcd c(h, h);
        c.real() = matrix(w.at("re"), h, h, tag + ".spectral.re");
        c.imag() = matrix(w.at("im"), h, h, tag + ".spectral.im");
        layer.mode_weights.push_back(std::move(c));
      }
      layer.bypass = matrix(layers[l].at("bypass"), h, h, tag + ".bypass");
      layer.bias = vector(layers[l].at("bias"), h, tag + ".bias");
      p.layers.push_back(std::move(layer));
    }
    p.projection_weight = matrix(j.at("projection").at("weight"), 1, h, "projection.weight");
    p.projection_bias = parse_hexfloat(j.at("projection").at("bias").get<std::string>());
    if (j.contains("reference_input")) m.reference_input = vector(j.at("reference_input"), n, "reference_input");

    check_params(m.spec, m.params);
    return m;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("model file: missing or mistyped field: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("model file: ") + e.what());
  }
}

void save_model(const FnoModel& model, const std::filesystem::path& path) { spill(path, model_to_json(model)); }
FnoModel load_model(const std::filesystem::path& path) { return model_from_json(slurp(path)); }

std::string pln_to_json(const PlnNet& net, const std::string& name) {
  net.validate();
  json layers = json::array();
  for (const auto& layer : net.layers) {
    layers.push_back({{"rows", layer.rows()},
                      {"cols", layer.cols()},
                      {"activation", to_string(layer.activation)},
                      {"weight", tensor(layer.weight)},
                      {"bias", tensor(layer.bias)}});
  }
  json j;
  j["format"] = "fnov-pln/1";
  if (!name.empty()) j["name"] = name;
  j["provenance"] = to_string(net.provenance);
  if (net.provenance == Provenance::Frozen) j["reference_input"] = tensor(net.reference_input);
  j["layers"] = std::move(layers);
  return j.dump(1);
}

PlnNet pln_from_json(const std::string& text) {
  json j = parse_json(text);
  try {
    PlnNet net;
    const auto prov = j.at("provenance").get<std::string>();
    if (prov != "exact" && prov != "frozen") throw std::runtime_error("unknown provenance '" + prov + "'");
    net.provenance = prov == "frozen" ? Provenance::Frozen : Provenance::Exact;
    for (const auto& l : j.at("layers")) {
      AffineLayer layer;
      const auto rows = l.at("rows").get<Eigen::Index>();
      const auto cols = l.at("cols").get<Eigen::Index>();
      layer.weight = matrix(l.at("weight"), rows, cols, "pln weight");
      layer.bias = vector(l.at("bias"), rows, "pln bias");
      layer.activation = activation_from_string(l.at("activation").get<std::string>());
      net.layers.push_back(std::move(layer));
    }
    if (net.provenance == Provenance::Frozen) {
      net.reference_input = vector(j.at("reference_input"), net.input_dim(), "reference_input");
    }
    net.validate();
    return net;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("net file: missing or mistyped field: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("net file: ") + e.what());
  }
}

void save_pln(const PlnNet& net, const std::filesystem::path& path, const std::string& name) {
  spill(path, pln_to_json(net, name));
}
PlnNet load_pln(const std::filesystem::path& path) { return pln_from_json(slurp(path)); }

}  // namespace fnov
