#pragma once

#include "fnov/falsify.hpp"
#include "fnov/fno.hpp"
#include "fnov/pde.hpp"
#include "fnov/pln.hpp"
#include "fnov/smt.hpp"
#include "fnov/solver.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fnov {

enum class VerdictKind { Proof, Counterexample, Timeout, Unknown, NoViolation };
enum class Soundness { SoundForOriginal, FrozenSurrogateOnly };

const char* to_string(VerdictKind k);
const char* to_string(Soundness s);
VerdictKind verdict_from_string(const std::string& s);
Soundness soundness_from_string(const std::string& s);

struct CeCheck {
  double severity = 0.0;
  bool violates = false;
};

/// Re-measures a candidate on the original FFT-path model. Mass violates when
/// severity > epsilon, positivity when severity > 0.
CeCheck validate_ce(const FnoModel& model, const Field& u, const PropertyQuery& q);

struct ThresholdProbe {
  double level = 0.0;
  SolverStatus status = SolverStatus::Error;
  double seconds = 0.0;
};

struct Verdict {
  VerdictKind kind = VerdictKind::Unknown;
  Soundness soundness = Soundness::SoundForOriginal;
  /// Last SAT witness, when any.
  std::optional<DecodedInput> witness;
  /// Severity of the witness on the compiled net, in exact arithmetic.
  double encoded_severity = 0.0;
  /// Severity of the witness on the original model.
  double severity = 0.0;
  bool violates_original = false;
  double solve_time = 0.0;
  int queries = 0;
  bool budget_exhausted = false;
  std::vector<ThresholdProbe> probes;
  std::string detail;
};

struct SolverSetup {
  SolverCommand command = SolverCommand::z3();
  double timeout_s = 600.0;
  /// Per-query .smt2 files and transcripts go here when set.
  std::filesystem::path artifact_dir;
  std::string artifact_stem;
};

struct SearchBudget {
  bool maximize = true;
  double gap = 1e-3;
  double total_seconds = 600.0;
  double cap = 64.0;
};

/// Sound upper bound on the severity any admissible input can reach on the
/// net, by interval propagation of the box.
double severity_upper_bound(const PlnNet& net, const ConstraintSet& c, PropertyKind kind);

/// Initial query at threshold 0; UNSAT gives a Proof, SAT a counterexample
/// that is then improved by bisection on the severity threshold until the
/// bracket is narrower than budget.gap or time runs out.
Verdict maximize_severity(const FnoModel& model, const PlnNet& net, const PropertyQuery& q,
                          const SolverSetup& solver, const SearchBudget& budget);

struct ResultRow {
  std::string model;
  int n = 0;
  int depth = 0;
  int hidden = 0;
  PropertyKind property = PropertyKind::MassNonIncrease;
  std::string method;  // z3-exact | z3-frozen | grad | mc
  VerdictKind verdict = VerdictKind::Unknown;
  Soundness soundness = Soundness::SoundForOriginal;
  std::optional<double> severity;
  std::optional<double> encoded_severity;
  double time_s = 0.0;
  std::optional<bool> confirmed;
  long work = 0;  // solver queries or model evaluations
  std::optional<double> search_best;
};

struct TrainingRow {
  std::string model;
  std::uint64_t seed = 0;
  int n = 0;
  int hidden = 0;
  int depth = 0;
  int params = 0;
  double train_mse = 0.0;
  double test_mse = 0.0;
};

ResultRow verdict_row(const FnoModel& model, const PropertyQuery& q, Provenance encoding, const Verdict& v);
ResultRow falsifier_row(const FnoModel& model, const PropertyQuery& q, const std::string& method,
                        const FalsifyResult& r);

struct ExperimentConfig {
  std::vector<FnoSpec> models;
  std::vector<FnoSpec> frozen_models;
  std::vector<PropertyKind> properties{PropertyKind::MassNonIncrease, PropertyKind::Positivity};
  double epsilon = 0.05;
  double lower = 0.1;
  bool exact = true;
  bool frozen = true;
  bool falsifiers = true;
  SolverCommand solver = SolverCommand::z3();
  double timeout_s = 600.0;
  SearchBudget search;
  int mc_samples = 5000;
  GradConfig grad;
  int n_train = 500;
  int n_holdout = 200;
  AdrRanges ranges;
  std::uint64_t seed = 2024;
  int workers = 1;
  std::filesystem::path output_dir = "results";

  /// The ten-model grid: depth 1 at N in {8, 16, 32}, depth 2 at N in
  /// {8, 16}, seeds 42 and 123, width 2; frozen track at N in {32, 64},
  /// widths {2, 4}, depths {1, 2}.
  static ExperimentConfig paper_grid();
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);
};

struct ExperimentResult {
  std::vector<TrainingRow> training;
  std::vector<ResultRow> rows;
  std::vector<FnoModel> models;
  std::vector<FnoModel> frozen_models;
};

/// Trains every model, runs every (model, property, method) cell and writes
/// models/, queries/, results.csv, training.csv, summary.txt and plots under
/// cfg.output_dir. Throws SolverNotFound before doing any work when the
/// solver cannot be resolved.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace fnov
