// Command-line front end: gen-data, train, compile, verify, falsify,
// run-all, report.

#include "fnov/dataset_io.hpp"
#include "fnov/falsify.hpp"
#include "fnov/harness.hpp"
#include "fnov/model_io.hpp"
#include "fnov/report.hpp"
#include "fnov/trainer.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace fnov;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PropertyQuery make_query(const std::string& property, double epsilon, double lower) {
  return property_from_string(property) == PropertyKind::MassNonIncrease ? PropertyQuery::mass(epsilon)
                                                                          : PropertyQuery::positivity(lower);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Train, compile and formally verify small Fourier neural operators"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate an ADR dataset");
  int gen_n = 16, gen_samples = 500;
  std::uint64_t gen_seed = 7;
  std::string gen_out = "dataset.json";
  gen->add_option("--grid,-N", gen_n, "Grid size");
  gen->add_option("--samples", gen_samples, "Number of pairs");
  gen->add_option("--seed", gen_seed, "Random seed");
  gen->add_option("--out,-o", gen_out, "Output JSON file");

  // train
  auto* train = app.add_subcommand("train", "Fit a random-feature FNO");
  int tr_n = 8, tr_depth = 1, tr_width = 2, tr_modes = 0, tr_samples = 500, tr_holdout = 200;
  std::uint64_t tr_seed = 42, tr_data_seed = 2024;
  std::string tr_out, tr_data, tr_csv;
  train->add_option("--grid,-N", tr_n, "Grid size");
  train->add_option("--depth,-L", tr_depth, "Hidden layers (1 = linear, 2 = one ReLU layer)");
  train->add_option("--width,-H", tr_width, "Hidden width");
  train->add_option("--modes", tr_modes, "Retained Fourier modes (default depends on N)");
  train->add_option("--seed", tr_seed, "Initialization seed");
  train->add_option("--data", tr_data, "Training dataset JSON (generated when omitted)");
  train->add_option("--data-seed", tr_data_seed, "Seed for generated datasets");
  train->add_option("--samples", tr_samples, "Training pairs when generating");
  train->add_option("--holdout", tr_holdout, "Holdout pairs");
  train->add_option("--out,-o", tr_out, "Model file (default <name>.json)");
  train->add_option("--csv", tr_csv, "Append a training report row to this CSV");

  // compile
  auto* comp = app.add_subcommand("compile", "Compile a model into a piecewise-linear net");
  std::string cp_model, cp_encoding = "exact", cp_out, cp_ref;
  comp->add_option("--model,-m", cp_model, "Model file")->required();
  comp->add_option("--encoding", cp_encoding, "exact | frozen")->check(CLI::IsMember({"exact", "frozen"}));
  comp->add_option("--reference", cp_ref, "Dataset whose input mean is the frozen reference");
  comp->add_option("--out,-o", cp_out, "Output net file")->required();

  // verify
  auto* ver = app.add_subcommand("verify", "Check a property with an SMT solver");
  std::string v_model, v_property = "mass", v_encoding = "exact", v_solver = SolverCommand::z3().str(), v_dir;
  double v_eps = 0.05, v_lower = 0.1, v_timeout = 600.0, v_budget = 600.0;
  bool v_maximize = false;
  ver->add_option("--model,-m", v_model, "Model file")->required();
  ver->add_option("--property", v_property, "mass | positivity")->check(CLI::IsMember({"mass", "positivity"}));
  ver->add_option("--encoding", v_encoding, "exact | frozen")->check(CLI::IsMember({"exact", "frozen"}));
  ver->add_option("--epsilon", v_eps, "Mass tolerance");
  ver->add_option("--lower", v_lower, "Input lower bound for positivity");
  ver->add_option("--timeout", v_timeout, "Per-query timeout in seconds");
  ver->add_option("--solver-cmd", v_solver, "Solver command template ({file}, {timeout}, {timeout_ms})");
  ver->add_flag("--maximize", v_maximize, "Bisect the severity threshold after a counterexample");
  ver->add_option("--budget", v_budget, "Time budget for --maximize in seconds");
  ver->add_option("--artifacts", v_dir, "Keep .smt2 files and transcripts here");

  // falsify
  auto* fal = app.add_subcommand("falsify", "Search for violations on the original model");
  std::string f_model, f_property = "mass", f_method = "grad";
  double f_eps = 0.05, f_lower = 0.1;
  int f_samples = 5000, f_restarts = 10, f_steps = 100;
  std::uint64_t f_seed = 1;
  fal->add_option("--model,-m", f_model, "Model file")->required();
  fal->add_option("--property", f_property, "mass | positivity")->check(CLI::IsMember({"mass", "positivity"}));
  fal->add_option("--method", f_method, "mc | grad")->check(CLI::IsMember({"mc", "grad"}));
  fal->add_option("--epsilon", f_eps, "Mass tolerance");
  fal->add_option("--lower", f_lower, "Input lower bound for positivity");
  fal->add_option("--samples", f_samples, "Monte Carlo samples");
  fal->add_option("--restarts", f_restarts, "Gradient restarts");
  fal->add_option("--steps", f_steps, "Gradient steps per restart");
  fal->add_option("--seed", f_seed, "Random seed");

  // run-all
  auto* all = app.add_subcommand("run-all", "Run the full experiment matrix");
  std::string a_config;
  all->add_option("--config,-c", a_config, "Experiment config (JSON); paper grid when omitted");

  // report
  auto* rep = app.add_subcommand("report", "Rebuild summary and plots from CSV files");
  std::string r_results = "results/results.csv", r_training, r_out;
  rep->add_option("--results", r_results, "results.csv");
  rep->add_option("--training", r_training, "training.csv");
  rep->add_option("--out,-o", r_out, "Output directory (default: beside results)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      Dataset ds = gen_dataset(gen_samples, Grid(gen_n), AdrRanges{}, gen_seed);
      save_dataset(ds, gen_out);
      std::cout << "wrote " << ds.samples.size() << " pairs to " << gen_out << '\n';
    } else if (*train) {
      FnoSpec spec = FnoSpec::make(tr_n, tr_depth, tr_seed, tr_width);
      if (tr_modes > 0) spec.modes_kept = tr_modes;
      spec.validate();
      Dataset train_set = tr_data.empty() ? gen_dataset(tr_samples, Grid(tr_n), AdrRanges{}, tr_data_seed)
                                          : load_dataset(tr_data);
      if (train_set.grid.n_points != tr_n) throw std::runtime_error("dataset grid does not match --grid");
      Dataset holdout = gen_dataset(tr_holdout, Grid(tr_n), train_set.ranges, train_set.seed + 1);
      TrainedModel t = train_model(spec, train_set, holdout);
      const std::string out = tr_out.empty() ? t.model.name() + ".json" : tr_out;
      save_model(t.model, out);
      std::cout << t.model.name() << ": params=" << count_params(spec) << " train_mse=" << t.fit.train_mse
                << " test_mse=" << t.test_mse << " rank=" << t.fit.rank << "/" << t.fit.unknowns
                << " cond=" << t.fit.condition << "\nwrote " << out << '\n';
      if (!tr_csv.empty()) {
        const bool fresh = !fs::exists(tr_csv);
        std::string csv = training_csv({{t.model.name(), spec.seed, spec.grid_size, spec.hidden_width, spec.depth,
                                          count_params(spec), t.fit.train_mse, t.test_mse}});
        if (!fresh) csv = csv.substr(csv.find('\n') + 1);
        std::ofstream(tr_csv, std::ios::app) << csv;
      }
    } else if (*comp) {
      FnoModel model = load_model(cp_model);
      PlnNet net;
      if (cp_encoding == "exact") {
        net = compile_exact(model);
      } else if (!cp_ref.empty()) {
        net = compile_frozen(model, load_dataset(cp_ref).mean_input());
      } else {
        net = compile_frozen(model);
      }
      save_pln(net, cp_out, model.name());
      std::cout << "wrote " << cp_encoding << " net (" << net.layers.size() << " layers) to " << cp_out << '\n';
    } else if (*ver) {
      FnoModel model = load_model(v_model);
      const Provenance enc = v_encoding == "exact" ? Provenance::Exact : Provenance::Frozen;
      PlnNet net = enc == Provenance::Exact ? compile_exact(model) : compile_frozen(model);
      PropertyQuery q = make_query(v_property, v_eps, v_lower);
      SolverSetup setup{SolverCommand::parse(v_solver), v_timeout, v_dir,
                        model.name() + "-" + v_property + "-" + v_encoding};
      SearchBudget budget;
      budget.maximize = v_maximize;
      budget.total_seconds = v_budget;
      Verdict v = maximize_severity(model, net, q, setup, budget);
      ResultRow row = verdict_row(model, q, enc, v);
      std::cout << row.model << " " << v_property << " " << row.method << ": " << to_string(v.kind) << " ("
                << to_string(v.soundness) << ") in " << std::setprecision(3) << v.solve_time << "s, " << v.queries
                << " queries\n";
      if (v.kind == VerdictKind::Counterexample) {
        std::cout << std::setprecision(10) << "severity on original model " << v.severity << ", on compiled net "
                  << v.encoded_severity << (v.violates_original ? "" : " (NOT confirmed on original model)")
                  << (v.budget_exhausted ? " [search budget exhausted]" : "") << "\ninput:";
        for (Eigen::Index i = 0; i < v.witness->values.size(); ++i) std::cout << ' ' << v.witness->values[i];
        std::cout << '\n';
      } else if (!v.detail.empty()) {
        std::cout << v.detail << '\n';
      }
    } else if (*fal) {
      FnoModel model = load_model(f_model);
      PropertyQuery q = make_query(f_property, f_eps, f_lower);
      ConstraintSet c = q.constraints(model.spec.grid_size);
      FalsifyResult r;
      if (f_method == "mc") {
        r = mc_falsify(surrogate(model), model.spec.grid(), c, q.kind, f_samples, f_seed);
      } else {
        GradConfig g;
        g.restarts = f_restarts;
        g.steps = f_steps;
        r = grad_falsify(surrogate(model), model.spec.grid(), c, q.kind, g, f_seed);
      }
      CeCheck check = validate_ce(model, r.best_input, q);
      std::cout << model.name() << " " << f_property << " " << f_method << ": best severity " << r.best_severity
                << (check.violates ? " (violation)" : " (no violation)") << ", " << r.evaluations
                << " evaluations, " << r.wall_time << "s\n";
    } else if (*all) {
      ExperimentConfig cfg = a_config.empty() ? ExperimentConfig::paper_grid() : ExperimentConfig::load(a_config);
      ExperimentResult res = run_experiment(cfg);
      std::cout << summary_table(res.rows) << "\nresults written to " << cfg.output_dir << '\n';
    } else if (*rep) {
      auto rows = parse_results_csv(slurp(r_results));
      std::vector<TrainingRow> training;
      if (!r_training.empty()) training = parse_training_csv(slurp(r_training));
      const fs::path out = r_out.empty() ? fs::path(r_results).parent_path() : fs::path(r_out);
      write_report(rows, training, out.empty() ? fs::path(".") : out);
      if (!rows.empty()) std::cout << summary_table(rows);
    }
  } catch (const SolverNotFound& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
