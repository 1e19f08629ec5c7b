#include "fnov/dataset_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fnov {

using nlohmann::json;

namespace {

json field_json(const Field& f) { return std::vector<double>(f.data(), f.data() + f.size()); }

Field field_from(const json& j, int n, const char* what) {
  auto values = j.get<std::vector<double>>();
  if (static_cast<int>(values.size()) != n) {
    throw std::runtime_error(std::string("dataset: ") + what + " has wrong length");
  }
  return Eigen::Map<const Field>(values.data(), n);
}

json interval_json(const Interval& r) { return json::array({r.lo, r.hi}); }
Interval interval_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

std::string dataset_to_json(const Dataset& ds) {
  json j;
  j["format"] = "fnov-dataset/1";
  j["grid"] = {{"n_points", ds.grid.n_points}, {"domain_length", ds.grid.domain_length}};
  j["seed"] = ds.seed;
  j["ranges"] = {{"diffusion", interval_json(ds.ranges.diffusion)},
                 {"velocity", interval_json(ds.ranges.velocity)},
                 {"reaction", interval_json(ds.ranges.reaction)},
                 {"horizon", ds.ranges.horizon}};
  json pairs = json::array();
  for (const auto& s : ds.samples) {
    pairs.push_back({{"input", field_json(s.input)},
                     {"target", field_json(s.target)},
                     {"params", {s.params.diffusion, s.params.velocity, s.params.reaction, s.params.horizon}}});
  }
  j["pairs"] = std::move(pairs);
  return j.dump(1);
}

Dataset dataset_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("dataset: malformed JSON: ") + e.what());
  }
  try {
    Dataset ds;
    ds.grid = Grid(j.at("grid").at("n_points").get<int>());
    ds.grid.domain_length = j.at("grid").at("domain_length").get<double>();
    ds.seed = j.at("seed").get<std::uint64_t>();
    const auto& r = j.at("ranges");
    ds.ranges.diffusion = interval_from(r.at("diffusion"));
    ds.ranges.velocity = interval_from(r.at("velocity"));
    ds.ranges.reaction = interval_from(r.at("reaction"));
    ds.ranges.horizon = r.at("horizon").get<double>();
    const int n = ds.grid.n_points;
    for (const auto& p : j.at("pairs")) {
      Sample s;
      s.input = field_from(p.at("input"), n, "input");
      s.target = field_from(p.at("target"), n, "target");
      const auto& pr = p.at("params");
      s.params = {pr.at(0).get<double>(), pr.at(1).get<double>(), pr.at(2).get<double>(), pr.at(3).get<double>()};
      ds.samples.push_back(std::move(s));
    }
    return ds;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("dataset: missing or mistyped field: ") + e.what());
  }
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << dataset_to_json(ds) << '\n';
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return dataset_from_json(buf.str());
}

}  // namespace fnov
