#pragma once

#include "fnov/rational.hpp"
#include "fnov/sexpr.hpp"
#include "fnov/smt.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fnov {

/// Solver launch template. Arguments may contain {file}, {timeout} (whole
/// seconds, rounded up) and {timeout_ms}.
struct SolverCommand {
  std::vector<std::string> argv;

  static SolverCommand parse(const std::string& command_line);
  static SolverCommand z3();

  std::vector<std::string> expand(const std::string& file, double timeout_s) const;
  std::string str() const;
};

struct SolverNotFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Solver answered in an unexpected way; carries the raw transcript.
struct ProtocolError : std::runtime_error {
  ProtocolError(const std::string& what, std::string raw_text)
      : std::runtime_error(what), raw(std::move(raw_text)) {}
  std::string raw;
};

/// Absolute path of the executable, searching PATH for bare names.
std::optional<std::filesystem::path> resolve_executable(const std::string& name);

enum class SolverStatus { Sat, Unsat, Unknown, Timeout, Error };

const char* to_string(SolverStatus s);

struct SolverOutcome {
  SolverStatus status = SolverStatus::Error;
  std::optional<std::map<std::string, Rational>> model;
  double wall_time = 0.0;
  std::string raw;
  int exit_code = 0;
};

/// Runs the solver on `script_path`, killing its whole process group once
/// `timeout_s` of wall time has elapsed. Throws SolverNotFound if the
/// executable cannot be resolved or spawned.
SolverOutcome run_solver_file(const std::filesystem::path& script_path, const SolverCommand& cmd, double timeout_s);

/// Writes the script to `script_path` (a temporary file when empty), runs it,
/// and optionally writes the raw transcript next to it.
SolverOutcome run_solver(const SmtScript& script, const SolverCommand& cmd, double timeout_s,
                         const std::filesystem::path& script_path = {}, bool keep_transcript = false);

/// Numeral, decimal, (/ p q), (- t) and nestings thereof.
Rational parse_rational(const SExpr& term);
Rational parse_rational(const std::string& text);

/// Status from the first sat/unsat/unknown/timeout token; values from
/// get-value responses or (model (define-fun ...)) blocks. Anything else in
/// the transcript is ignored.
SolverOutcome parse_solver_output(const std::string& raw, int exit_code = 0);

struct DecodedInput {
  Field values;
  std::vector<Rational> exact;
};

/// Values of var_map in order. Throws ProtocolError when the outcome is not
/// sat or a variable is missing.
DecodedInput decode_counterexample(const SolverOutcome& outcome, const std::vector<std::string>& var_map);

}  // namespace fnov
