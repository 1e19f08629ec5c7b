#include "fnov/solver.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace fnov {

namespace fs = std::filesystem;

const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::Sat: return "sat";
    case SolverStatus::Unsat: return "unsat";
    case SolverStatus::Unknown: return "unknown";
    case SolverStatus::Timeout: return "timeout";
    case SolverStatus::Error: return "error";
  }
  return "error";
}

SolverCommand SolverCommand::parse(const std::string& command_line) {
  SolverCommand cmd;
  std::istringstream is(command_line);
  for (std::string tok; is >> tok;) cmd.argv.push_back(tok);
  if (cmd.argv.empty()) throw std::invalid_argument("solver command is empty");
  bool has_file = false;
  for (const auto& a : cmd.argv) has_file = has_file || a.find("{file}") != std::string::npos;
  if (!has_file) cmd.argv.push_back("{file}");
  return cmd;
}

SolverCommand SolverCommand::z3() {
  // Equality propagation in the arithmetic core stalls on the dense spectral
  // rows; without it ReLU queries at N=16 go from minutes to milliseconds.
  return parse("z3 -smt2 smt.arith.propagate_eqs=false {file}");
}

std::vector<std::string> SolverCommand::expand(const std::string& file, double timeout_s) const {
  auto replace_all = [](std::string s, const std::string& key, const std::string& value) {
    for (auto at = s.find(key); at != std::string::npos; at = s.find(key, at + value.size())) {
      s.replace(at, key.size(), value);
    }
    return s;
  };
  const auto seconds = static_cast<long>(std::ceil(std::max(timeout_s, 0.0)));
  const auto millis = static_cast<long>(std::ceil(std::max(timeout_s, 0.0) * 1000.0));
  std::vector<std::string> out;
  for (auto a : argv) {
    a = replace_all(a, "{file}", file);
    a = replace_all(a, "{timeout_ms}", std::to_string(millis));
    a = replace_all(a, "{timeout}", std::to_string(std::max(seconds, 1L)));
    out.push_back(std::move(a));
  }
  return out;
}

std::string SolverCommand::str() const {
  std::string s;
  for (const auto& a : argv) s += (s.empty() ? "" : " ") + a;
  return s;
}

std::optional<fs::path> resolve_executable(const std::string& name) {
  auto runnable = [](const fs::path& p) { return ::access(p.c_str(), X_OK) == 0 && !fs::is_directory(p); };
  if (name.find('/') != std::string::npos) {
    if (runnable(name)) return fs::absolute(name);
    return std::nullopt;
  }
  const char* path = std::getenv("PATH");
  if (path == nullptr) return std::nullopt;
  std::istringstream dirs(path);
  for (std::string dir; std::getline(dirs, dir, ':');) {
    fs::path candidate = fs::path(dir.empty() ? "." : dir) / name;
    if (runnable(candidate)) return candidate;
  }
  return std::nullopt;
}

SolverOutcome run_solver_file(const fs::path& script_path, const SolverCommand& cmd, double timeout_s) {
  if (cmd.argv.empty()) throw std::invalid_argument("solver command is empty");
  auto exe = resolve_executable(cmd.argv.front());
  if (!exe) {
    throw SolverNotFound("solver executable '" + cmd.argv.front() +
                         "' not found on PATH; install it or pass --solver-cmd");
  }
  auto args = cmd.expand(script_path.string(), timeout_s);
  args.front() = exe->string();
  std::vector<char*> cargs;
  for (auto& a : args) cargs.push_back(a.data());
  cargs.push_back(nullptr);

  int out_pipe[2];
  int err_pipe[2];
  if (::pipe2(out_pipe, O_CLOEXEC) != 0 || ::pipe2(err_pipe, O_CLOEXEC) != 0) {
    throw std::runtime_error(std::string("pipe: ") + std::strerror(errno));
  }

  const auto start = std::chrono::steady_clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) throw std::runtime_error(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(out_pipe[1], STDERR_FILENO);
    ::execv(cargs.front(), cargs.data());
    const int err = errno;
    [[maybe_unused]] auto n = ::write(err_pipe[1], &err, sizeof err);
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);

  int exec_errno = 0;
  if (::read(err_pipe[0], &exec_errno, sizeof exec_errno) == static_cast<ssize_t>(sizeof exec_errno)) {
    ::close(err_pipe[0]);
    ::close(out_pipe[0]);
    ::waitpid(pid, nullptr, 0);
    throw SolverNotFound("cannot execute '" + args.front() + "': " + std::strerror(exec_errno));
  }
  ::close(err_pipe[0]);

  SolverOutcome outcome;
  const auto deadline = start + std::chrono::duration<double>(timeout_s);
  bool timed_out = false;
  char buf[4096];
  while (true) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      timed_out = true;
      break;
    }
    const auto wait_ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    pollfd pfd{out_pipe[0], POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(wait_ms + 1, 1000)));
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) continue;
    const ssize_t got = ::read(out_pipe[0], buf, sizeof buf);
    if (got > 0) {
      outcome.raw.append(buf, static_cast<std::size_t>(got));
    } else if (got == 0 || errno != EINTR) {
      break;
    }
  }

  int status = 0;
  if (timed_out) {
    ::kill(-pid, SIGKILL);
    ::kill(pid, SIGKILL);
  }
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (timed_out) {
    // Reap anything left in the group; the solver may have forked helpers.
    ::kill(-pid, SIGKILL);
  }
  ::close(out_pipe[0]);
  outcome.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const int exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (timed_out) {
    outcome.status = SolverStatus::Timeout;
    outcome.exit_code = exit_code;
    return outcome;
  }
  SolverOutcome parsed = parse_solver_output(outcome.raw, exit_code);
  parsed.wall_time = outcome.wall_time;
  return parsed;
}

SolverOutcome run_solver(const SmtScript& script, const SolverCommand& cmd, double timeout_s,
                         const fs::path& script_path, bool keep_transcript) {
  fs::path path = script_path;
  bool temporary = false;
  if (path.empty()) {
    std::string tmpl = (fs::temp_directory_path() / "fnov-XXXXXX.smt2").string();
    const int fd = ::mkstemps(tmpl.data(), 5);
    if (fd < 0) throw std::runtime_error(std::string("mkstemps: ") + std::strerror(errno));
    ::close(fd);
    path = tmpl;
    temporary = true;
  }
  {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << script.text;
  }

  SolverOutcome outcome;
  try {
    outcome = run_solver_file(path, cmd, timeout_s);
  } catch (...) {
    if (temporary) fs::remove(path);
    throw;
  }
  if (temporary) fs::remove(path);
  if (keep_transcript && !temporary) {
    fs::path transcript = path;
    transcript.replace_extension(".out");
    std::ofstream out(transcript);
    out << ";; status " << to_string(outcome.status) << " exit " << outcome.exit_code << " wall "
        << outcome.wall_time << "s\n"
        << outcome.raw;
  }
  return outcome;
}

Rational parse_rational(const SExpr& term) {
  if (term.is_atom()) {
    if (term.atom.empty() || term.atom.find('/') != std::string::npos) {
      throw SExprError("malformed rational term '" + term.atom + "'");
    }
    try {
      return parse_decimal(term.atom);
    } catch (const std::invalid_argument&) {
      throw SExprError("malformed rational term '" + term.atom + "'");
    }
  }
  const auto& it = term.items;
  if (it.size() == 2 && it[0].is("-")) return -parse_rational(it[1]);
  if (it.size() == 3 && it[0].is("-")) return parse_rational(it[1]) - parse_rational(it[2]);
  if (it.size() == 3 && it[0].is("/")) {
    Rational den = parse_rational(it[2]);
    if (sgn(den) == 0) throw SExprError("division by zero in '" + term.str() + "'");
    return parse_rational(it[1]) / den;
  }
  throw SExprError("malformed rational term '" + term.str() + "'");
}

Rational parse_rational(const std::string& text) {
  std::size_t pos = 0;
  SExpr e = parse_sexpr(text, pos);
  for (; pos < text.size(); ++pos) {
    if (!std::isspace(static_cast<unsigned char>(text[pos]))) throw SExprError("trailing input in '" + text + "'");
  }
  return parse_rational(e);
}

namespace {

void collect_get_value(const SExpr& e, std::map<std::string, Rational>& model) {
  if (!e.is_list || e.items.empty()) return;
  for (const auto& pair : e.items) {
    if (!pair.is_list || pair.items.size() != 2 || !pair.items[0].is_atom()) return;
  }
  std::map<std::string, Rational> found;
  for (const auto& pair : e.items) {
    try {
      found.emplace(pair.items[0].atom, parse_rational(pair.items[1]));
    } catch (const SExprError&) {
      return;
    }
  }
  model.insert(found.begin(), found.end());
}

void collect_define_funs(const SExpr& e, std::map<std::string, Rational>& model) {
  if (!e.is_list) return;
  if (e.items.size() == 5 && e.items[0].is("define-fun") && e.items[2].is_list && e.items[2].items.empty()) {
    try {
      model.emplace(e.items[1].atom, parse_rational(e.items[4]));
    } catch (const SExprError&) {
    }
    return;
  }
  for (const auto& item : e.items) collect_define_funs(item, model);
}

bool is_model_block(const SExpr& e) {
  if (!e.is_list || e.items.empty()) return false;
  if (e.items[0].is("model")) return true;
  return e.items[0].is_list && !e.items[0].items.empty() && e.items[0].items[0].is("define-fun");
}

}  // namespace

SolverOutcome parse_solver_output(const std::string& raw, int exit_code) {
  SolverOutcome out;
  out.raw = raw;
  out.exit_code = exit_code;
  std::optional<SolverStatus> status;
  std::map<std::string, Rational> model;

  for (const auto& e : parse_sexprs_lenient(raw)) {
    if (e.is_atom()) {
      if (status) continue;
      if (e.atom == "sat") status = SolverStatus::Sat;
      else if (e.atom == "unsat") status = SolverStatus::Unsat;
      else if (e.atom == "unknown") status = SolverStatus::Unknown;
      else if (e.atom == "timeout") status = SolverStatus::Timeout;
      continue;
    }
    if (is_model_block(e)) {
      collect_define_funs(e, model);
    } else {
      collect_get_value(e, model);
    }
  }

  out.status = status.value_or(SolverStatus::Error);
  if (out.status == SolverStatus::Sat) out.model = std::move(model);
  return out;
}

DecodedInput decode_counterexample(const SolverOutcome& outcome, const std::vector<std::string>& var_map) {
  if (outcome.status != SolverStatus::Sat || !outcome.model) {
    throw ProtocolError("decode_counterexample: outcome is not sat", outcome.raw);
  }
  DecodedInput decoded;
  decoded.values.resize(static_cast<Eigen::Index>(var_map.size()));
  for (std::size_t i = 0; i < var_map.size(); ++i) {
    auto it = outcome.model->find(var_map[i]);
    if (it == outcome.model->end()) {
      throw ProtocolError("solver model has no value for '" + var_map[i] + "'", outcome.raw);
    }
    decoded.exact.push_back(it->second);
    decoded.values[static_cast<Eigen::Index>(i)] = to_double(it->second);
  }
  return decoded;
}

}  // namespace fnov
