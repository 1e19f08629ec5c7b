#include "fnov/harness.hpp"

#include "fnov/dataset_io.hpp"
#include "fnov/model_io.hpp"
#include "fnov/report.hpp"
#include "fnov/trainer.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace fnov {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Proof: return "proof";
    case VerdictKind::Counterexample: return "counterexample";
    case VerdictKind::Timeout: return "timeout";
    case VerdictKind::Unknown: return "unknown";
    case VerdictKind::NoViolation: return "no-violation";
  }
  return "unknown";
}

const char* to_string(Soundness s) {
  return s == Soundness::FrozenSurrogateOnly ? "frozen-surrogate-only" : "sound-for-original";
}

VerdictKind verdict_from_string(const std::string& s) {
  for (auto k : {VerdictKind::Proof, VerdictKind::Counterexample, VerdictKind::Timeout, VerdictKind::Unknown,
                 VerdictKind::NoViolation}) {
    if (s == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown verdict '" + s + "'");
}

Soundness soundness_from_string(const std::string& s) {
  if (s == to_string(Soundness::FrozenSurrogateOnly)) return Soundness::FrozenSurrogateOnly;
  if (s == to_string(Soundness::SoundForOriginal)) return Soundness::SoundForOriginal;
  throw std::invalid_argument("unknown soundness scope '" + s + "'");
}

CeCheck validate_ce(const FnoModel& model, const Field& u, const PropertyQuery& q) {
  const Field out = forward(model, u);
  CeCheck check;
  check.severity = severity(q.kind, u, out);
  check.violates = q.kind == PropertyKind::MassNonIncrease ? check.severity > q.epsilon : check.severity > 0.0;
  return check;
}

double severity_upper_bound(const PlnNet& net, const ConstraintSet& c, PropertyKind kind) {
  net.validate();
  const Eigen::Index n = net.input_dim();
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, to_double(c.lower));
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(n, to_double(c.upper));
  for (const auto& layer : net.layers) {
    const Eigen::MatrixXd pos = layer.weight.cwiseMax(0.0);
    const Eigen::MatrixXd neg = layer.weight.cwiseMin(0.0);
    Eigen::VectorXd new_lo = pos * lo + neg * hi + layer.bias;
    Eigen::VectorXd new_hi = pos * hi + neg * lo + layer.bias;
    if (layer.activation == Activation::Relu) {
      new_lo = new_lo.cwiseMax(0.0);
      new_hi = new_hi.cwiseMax(0.0);
    }
    lo = std::move(new_lo);
    hi = std::move(new_hi);
  }
  double bound = kind == PropertyKind::MassNonIncrease ? hi.mean() - to_double(c.lower) : -lo.minCoeff();
  // Interval sums are evaluated in binary64; pad for rounding.
  return bound + 1e-9 * (1.0 + std::abs(bound));
}

namespace {

std::string short_number(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc() ? std::string(buf, ptr) : std::to_string(x);
}

struct QueryResult {
  SolverOutcome outcome;
  std::optional<DecodedInput> decoded;
  double encoded_severity = 0.0;
};

}  // namespace

Verdict maximize_severity(const FnoModel& model, const PlnNet& net, const PropertyQuery& q,
                          const SolverSetup& solver, const SearchBudget& budget) {
  const auto start = Clock::now();
  const int n = model.spec.grid_size;
  const ConstraintSet constraints = q.constraints(n);
  PropertyQuery base_query = q;
  base_query.severity_threshold.reset();
  const double base = base_query.violation_level();

  Verdict v;
  v.soundness = net.provenance == Provenance::Exact ? Soundness::SoundForOriginal : Soundness::FrozenSurrogateOnly;

  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  auto run_at = [&](double level, double timeout) {
    PropertyQuery probe = base_query;
    probe.severity_threshold = std::max(0.0, level - base);
    SmtScript script = encode_query(net, constraints, probe);
    fs::path path;
    if (!solver.artifact_dir.empty()) {
      fs::create_directories(solver.artifact_dir);
      path = solver.artifact_dir / (solver.artifact_stem + "-t" + short_number(*probe.severity_threshold) + ".smt2");
    }
    QueryResult r;
    r.outcome = run_solver(script, solver.command, timeout, path, !path.empty());
    ++v.queries;
    v.probes.push_back({level, r.outcome.status, r.outcome.wall_time});
    if (r.outcome.status == SolverStatus::Sat) {
      r.decoded = decode_counterexample(r.outcome, script.var_map);
      const auto out = eval_pln_exact(net, r.decoded->exact);
      r.encoded_severity = to_double(severity_exact(q.kind, r.decoded->exact, out));
    }
    return r;
  };

  auto adopt = [&](const QueryResult& r) {
    v.witness = r.decoded;
    v.encoded_severity = r.encoded_severity;
    const CeCheck check = validate_ce(model, r.decoded->values, base_query);
    v.severity = check.severity;
    v.violates_original = check.violates;
  };

  QueryResult first = run_at(base, solver.timeout_s);
  switch (first.outcome.status) {
    case SolverStatus::Unsat:
      v.kind = VerdictKind::Proof;
      v.solve_time = elapsed();
      return v;
    case SolverStatus::Timeout:
      v.kind = VerdictKind::Timeout;
      v.solve_time = elapsed();
      return v;
    case SolverStatus::Unknown:
    case SolverStatus::Error:
      v.kind = VerdictKind::Unknown;
      v.detail = first.outcome.raw.substr(0, 400);
      v.solve_time = elapsed();
      return v;
    case SolverStatus::Sat:
      break;
  }
  v.kind = VerdictKind::Counterexample;
  adopt(first);

  if (budget.maximize) {
    double floor = v.encoded_severity;
    double ceiling = severity_upper_bound(net, constraints, q.kind);
    bool ceiling_proven = true;
    if (ceiling > budget.cap) {
      ceiling = budget.cap;
      ceiling_proven = false;
    }
    if (!ceiling_proven && floor < ceiling) {
      const double remaining = budget.total_seconds - elapsed();
      QueryResult top = run_at(ceiling, std::min(solver.timeout_s, std::max(remaining, 0.0)));
      if (top.outcome.status == SolverStatus::Sat) {
        adopt(top);
        floor = ceiling = v.encoded_severity;
      } else if (top.outcome.status != SolverStatus::Unsat) {
        v.budget_exhausted = true;
      }
    }
    while (!v.budget_exhausted && ceiling - floor >= budget.gap) {
      const double remaining = budget.total_seconds - elapsed();
      if (remaining <= 0.0) {
        v.budget_exhausted = true;
        break;
      }
      const double mid = 0.5 * (floor + ceiling);
      QueryResult r = run_at(mid, std::min(solver.timeout_s, remaining));
      if (r.outcome.status == SolverStatus::Sat) {
        adopt(r);
        floor = std::max(floor, r.encoded_severity);
      } else if (r.outcome.status == SolverStatus::Unsat) {
        ceiling = mid;
      } else {
        v.budget_exhausted = true;
      }
    }
  }
  v.solve_time = elapsed();
  return v;
}

ResultRow verdict_row(const FnoModel& model, const PropertyQuery& q, Provenance encoding, const Verdict& v) {
  ResultRow row;
  row.model = model.name();
  row.n = model.spec.grid_size;
  row.depth = model.spec.depth;
  row.hidden = model.spec.hidden_width;
  row.property = q.kind;
  row.method = encoding == Provenance::Exact ? "z3-exact" : "z3-frozen";
  row.verdict = v.kind;
  row.soundness = v.soundness;
  row.time_s = v.solve_time;
  row.work = v.queries;
  if (v.kind == VerdictKind::Counterexample) {
    row.severity = v.severity;
    row.encoded_severity = v.encoded_severity;
    if (encoding == Provenance::Frozen) row.confirmed = v.violates_original;
  }
  return row;
}

ResultRow falsifier_row(const FnoModel& model, const PropertyQuery& q, const std::string& method,
                        const FalsifyResult& r) {
  ResultRow row;
  row.model = model.name();
  row.n = model.spec.grid_size;
  row.depth = model.spec.depth;
  row.hidden = model.spec.hidden_width;
  row.property = q.kind;
  row.method = method;
  const CeCheck check = validate_ce(model, r.best_input, q);
  row.verdict = check.violates ? VerdictKind::Counterexample : VerdictKind::NoViolation;
  row.soundness = Soundness::SoundForOriginal;
  if (check.violates) row.severity = check.severity;
  row.search_best = r.best_severity;
  row.time_s = r.wall_time;
  row.work = r.evaluations;
  return row;
}

ExperimentConfig ExperimentConfig::paper_grid() {
  ExperimentConfig cfg;
  for (std::uint64_t seed : {42u, 123u}) {
    for (int n : {8, 16, 32}) cfg.models.push_back(FnoSpec::make(n, 1, seed));
    for (int n : {8, 16}) cfg.models.push_back(FnoSpec::make(n, 2, seed));
  }
  for (int n : {32, 64}) {
    for (int h : {2, 4}) {
      for (int depth : {1, 2}) cfg.frozen_models.push_back(FnoSpec::make(n, depth, 42, h));
    }
  }
  return cfg;
}

namespace {

std::vector<FnoSpec> specs_from(const nlohmann::json& arr) {
  std::vector<FnoSpec> out;
  for (const auto& m : arr) {
    FnoSpec spec = FnoSpec::make(m.at("n").get<int>(), m.at("depth").get<int>(), m.at("seed").get<std::uint64_t>(),
                                 m.value("hidden", 2));
    if (m.contains("modes")) spec.modes_kept = m.at("modes").get<int>();
    if (m.contains("activations")) {
      spec.activations.clear();
      for (const auto& a : m.at("activations")) spec.activations.push_back(activation_from_string(a.get<std::string>()));
    }
    spec.validate();
    out.push_back(spec);
  }
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("config: malformed JSON: ") + e.what());
  }
  try {
    ExperimentConfig cfg = j.value("paper_grid", true) ? paper_grid() : ExperimentConfig{};
    if (j.contains("models")) cfg.models = specs_from(j.at("models"));
    if (j.contains("frozen_models")) cfg.frozen_models = specs_from(j.at("frozen_models"));
    if (j.contains("properties")) {
      cfg.properties.clear();
      for (const auto& p : j.at("properties")) cfg.properties.push_back(property_from_string(p.get<std::string>()));
    }
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
    cfg.lower = j.value("lower", cfg.lower);
    if (j.contains("encodings")) {
      cfg.exact = cfg.frozen = false;
      for (const auto& e : j.at("encodings")) {
        const auto name = e.get<std::string>();
        if (name == "exact") cfg.exact = true;
        else if (name == "frozen") cfg.frozen = true;
        else throw std::runtime_error("config: unknown encoding '" + name + "'");
      }
    }
    cfg.falsifiers = j.value("falsifiers", cfg.falsifiers);
    if (j.contains("solver_cmd")) cfg.solver = SolverCommand::parse(j.at("solver_cmd").get<std::string>());
    cfg.timeout_s = j.value("timeout", cfg.timeout_s);
    cfg.search.maximize = j.value("maximize", cfg.search.maximize);
    cfg.search.gap = j.value("severity_gap", cfg.search.gap);
    cfg.search.total_seconds = j.value("search_seconds", cfg.search.total_seconds);
    cfg.mc_samples = j.value("mc_samples", cfg.mc_samples);
    cfg.grad.restarts = j.value("grad_restarts", cfg.grad.restarts);
    cfg.grad.steps = j.value("grad_steps", cfg.grad.steps);
    cfg.grad.fd_step = j.value("fd_step", cfg.grad.fd_step);
    cfg.grad.step_size = j.value("step_size", cfg.grad.step_size);
    cfg.n_train = j.value("n_train", cfg.n_train);
    cfg.n_holdout = j.value("n_holdout", cfg.n_holdout);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.workers = std::max(1, j.value("workers", cfg.workers));
    cfg.output_dir = j.value("output_dir", cfg.output_dir.string());
    if (cfg.epsilon < 0.0) throw std::runtime_error("config: epsilon must be >= 0");
    return cfg;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config: missing or mistyped field: ") + e.what());
  }
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

namespace {

void write_counterexample(const fs::path& path, const Verdict& v) {
  if (!v.witness) return;
  nlohmann::json j;
  std::vector<std::string> exact;
  for (const auto& q : v.witness->exact) exact.push_back(q.get_str());
  j["input_exact"] = exact;
  j["input"] = std::vector<double>(v.witness->values.data(), v.witness->values.data() + v.witness->values.size());
  j["encoded_severity"] = v.encoded_severity;
  j["original_severity"] = v.severity;
  j["violates_original"] = v.violates_original;
  std::ofstream(path) << j.dump(1) << '\n';
}

PropertyQuery query_for(const ExperimentConfig& cfg, PropertyKind kind) {
  return kind == PropertyKind::MassNonIncrease ? PropertyQuery::mass(cfg.epsilon) : PropertyQuery::positivity(cfg.lower);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.solver.argv.empty() || !resolve_executable(cfg.solver.argv.front())) {
    throw SolverNotFound("solver executable '" + (cfg.solver.argv.empty() ? std::string() : cfg.solver.argv.front()) +
                         "' not found on PATH; install z3 or set solver_cmd in the config");
  }
  const fs::path out = cfg.output_dir;
  fs::create_directories(out / "models");
  fs::create_directories(out / "data");
  fs::create_directories(out / "queries");

  ExperimentResult result;

  std::map<int, std::pair<Dataset, Dataset>> data;
  auto datasets_for = [&](int n) -> const std::pair<Dataset, Dataset>& {
    auto it = data.find(n);
    if (it == data.end()) {
      Dataset train = gen_dataset(cfg.n_train, Grid(n), cfg.ranges, cfg.seed);
      Dataset holdout = gen_dataset(cfg.n_holdout, Grid(n), cfg.ranges, cfg.seed + 1);
      save_dataset(train, out / "data" / ("train-N" + std::to_string(n) + ".json"));
      save_dataset(holdout, out / "data" / ("holdout-N" + std::to_string(n) + ".json"));
      it = data.emplace(n, std::make_pair(std::move(train), std::move(holdout))).first;
    }
    return it->second;
  };

  auto train_all = [&](const std::vector<FnoSpec>& specs, std::vector<FnoModel>& into) {
    for (const auto& spec : specs) {
      const auto& [train, holdout] = datasets_for(spec.grid_size);
      TrainedModel t = train_model(spec, train, holdout);
      save_model(t.model, out / "models" / (t.model.name() + ".json"));
      result.training.push_back({t.model.name(), spec.seed, spec.grid_size, spec.hidden_width, spec.depth,
                                 count_params(spec), t.fit.train_mse, t.test_mse});
      into.push_back(std::move(t.model));
    }
  };
  train_all(cfg.models, result.models);
  if (cfg.frozen) train_all(cfg.frozen_models, result.frozen_models);

  std::vector<std::function<std::vector<ResultRow>()>> jobs;
  auto add_solver_jobs = [&](const FnoModel& model, Provenance encoding) {
    for (auto kind : cfg.properties) {
      jobs.push_back([&cfg, &model, encoding, kind, out] {
        const PropertyQuery q = query_for(cfg, kind);
        const PlnNet net = encoding == Provenance::Exact ? compile_exact(model) : compile_frozen(model);
        SolverSetup setup{cfg.solver, cfg.timeout_s, out / "queries",
                          model.name() + "-" + to_string(kind) + "-" + to_string(encoding)};
        Verdict v;
        try {
          v = maximize_severity(model, net, q, setup, cfg.search);
        } catch (const ProtocolError& e) {
          v.kind = VerdictKind::Unknown;
          v.soundness = encoding == Provenance::Exact ? Soundness::SoundForOriginal : Soundness::FrozenSurrogateOnly;
          v.detail = e.what();
        }
        write_counterexample(setup.artifact_dir / (setup.artifact_stem + ".ce.json"), v);
        return std::vector<ResultRow>{verdict_row(model, q, encoding, v)};
      });
    }
  };

  for (std::size_t m = 0; m < result.models.size(); ++m) {
    const FnoModel& model = result.models[m];
    if (cfg.exact) add_solver_jobs(model, Provenance::Exact);
    if (!cfg.falsifiers) continue;
    for (std::size_t p = 0; p < cfg.properties.size(); ++p) {
      const std::uint64_t stream = derive_seed(cfg.seed, m * 16 + p);
      jobs.push_back([&cfg, &model, kind = cfg.properties[p], stream] {
        const PropertyQuery q = query_for(cfg, kind);
        const ConstraintSet c = q.constraints(model.spec.grid_size);
        const Grid grid = model.spec.grid();
        const Surrogate f = surrogate(model);
        return std::vector<ResultRow>{
            falsifier_row(model, q, "grad", grad_falsify(f, grid, c, kind, cfg.grad, stream)),
            falsifier_row(model, q, "mc", mc_falsify(f, grid, c, kind, cfg.mc_samples, stream + 1)),
        };
      });
    }
  }
  if (cfg.frozen) {
    for (const auto& model : result.frozen_models) add_solver_jobs(model, Provenance::Frozen);
  }

  std::mutex lock;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      auto rows = jobs[i]();
      std::lock_guard guard(lock);
      result.rows.insert(result.rows.end(), rows.begin(), rows.end());
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < cfg.workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  sort_rows(result.rows);
  write_report(result.rows, result.training, out);
  return result;
}

}  // namespace fnov
