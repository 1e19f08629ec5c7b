#include "fnov/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace fnov {

namespace fs = std::filesystem;

namespace {

const char* kResultsHeader =
    "model,n,depth,hidden,property,method,verdict,soundness,severity,encoded_severity,time_s,confirmed,work,"
    "search_best";
const char* kTrainingHeader = "model,seed,n,hidden,depth,params,train_mse,test_mse";

std::string num(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string opt(const std::optional<double>& x) { return x ? num(*x) : ""; }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::optional<double> opt_num(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

std::vector<std::string> data_lines(const std::string& text, const char* header) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line) || line != header) throw std::runtime_error("CSV header mismatch");
  while (std::getline(ss, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

void sort_rows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.depth, a.hidden, a.n, a.model, a.property, a.method) <
           std::tie(b.depth, b.hidden, b.n, b.model, b.property, b.method);
  });
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << kResultsHeader << '\n';
  for (const auto& r : rows) {
    os << r.model << ',' << r.n << ',' << r.depth << ',' << r.hidden << ',' << to_string(r.property) << ','
       << r.method << ',' << to_string(r.verdict) << ',' << to_string(r.soundness) << ',' << opt(r.severity) << ','
       << opt(r.encoded_severity) << ',' << num(r.time_s) << ','
       << (r.confirmed ? (*r.confirmed ? "true" : "false") : "") << ',' << r.work << ',' << opt(r.search_best)
       << '\n';
  }
  return os.str();
}

std::vector<ResultRow> parse_results_csv(const std::string& text) {
  std::vector<ResultRow> rows;
  for (const auto& line : data_lines(text, kResultsHeader)) {
    auto c = split(line);
    if (c.size() != 14) throw std::runtime_error("results CSV: expected 14 columns in '" + line + "'");
    ResultRow r;
    r.model = c[0];
    r.n = std::stoi(c[1]);
    r.depth = std::stoi(c[2]);
    r.hidden = std::stoi(c[3]);
    r.property = property_from_string(c[4]);
    r.method = c[5];
    r.verdict = verdict_from_string(c[6]);
    r.soundness = soundness_from_string(c[7]);
    r.severity = opt_num(c[8]);
    r.encoded_severity = opt_num(c[9]);
    r.time_s = std::stod(c[10]);
    if (!c[11].empty()) r.confirmed = c[11] == "true";
    r.work = std::stol(c[12]);
    r.search_best = opt_num(c[13]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string training_csv(const std::vector<TrainingRow>& rows) {
  std::ostringstream os;
  os << kTrainingHeader << '\n';
  for (const auto& r : rows) {
    os << r.model << ',' << r.seed << ',' << r.n << ',' << r.hidden << ',' << r.depth << ',' << r.params << ','
       << num(r.train_mse) << ',' << num(r.test_mse) << '\n';
  }
  return os.str();
}

std::vector<TrainingRow> parse_training_csv(const std::string& text) {
  std::vector<TrainingRow> rows;
  for (const auto& line : data_lines(text, kTrainingHeader)) {
    auto c = split(line);
    if (c.size() != 8) throw std::runtime_error("training CSV: expected 8 columns in '" + line + "'");
    rows.push_back({c[0], std::stoull(c[1]), std::stoi(c[2]), std::stoi(c[3]), std::stoi(c[4]), std::stoi(c[5]),
                    std::stod(c[6]), std::stod(c[7])});
  }
  return rows;
}

std::string summary_table(const std::vector<ResultRow>& rows) {
  struct Counts {
    int proof = 0, ce = 0, uc = 0, to = 0, unknown = 0;
  };
  std::map<std::pair<std::string, int>, Counts> table;
  std::vector<std::pair<std::string, int>> order;
  int frozen_max_n = 0;
  for (const auto& r : rows) {
    if (r.method == "z3-frozen") frozen_max_n = std::max(frozen_max_n, r.n);
  }
  for (const auto& r : rows) {
    if (r.method != "z3-exact" && r.method != "z3-frozen") continue;
    const std::string enc = r.method == "z3-exact" ? "Exact, L=" + std::to_string(r.depth)
                                                   : "Frozen, N<=" + std::to_string(frozen_max_n);
    const auto key = std::make_pair(enc, static_cast<int>(r.property));
    if (!table.count(key)) order.push_back(key);
    auto& c = table[key];
    switch (r.verdict) {
      case VerdictKind::Proof: ++c.proof; break;
      case VerdictKind::Counterexample: (r.confirmed && !*r.confirmed ? c.uc : c.ce)++; break;
      case VerdictKind::Timeout: ++c.to; break;
      default: ++c.unknown; break;
    }
  }
  std::sort(order.begin(), order.end());

  std::ostringstream os;
  os << std::left << std::setw(16) << "Encoding" << std::setw(12) << "Property" << std::right << std::setw(7)
     << "Proof" << std::setw(5) << "CE" << std::setw(5) << "UC" << std::setw(5) << "TO" << '\n';
  bool any_frozen_proof = false;
  int unknowns = 0;
  for (const auto& key : order) {
    const auto& c = table[key];
    const bool frozen = key.first.rfind("Frozen", 0) == 0;
    any_frozen_proof = any_frozen_proof || (frozen && c.proof > 0);
    unknowns += c.unknown;
    const std::string proof = std::to_string(c.proof) + (frozen && c.proof > 0 ? "*" : "");
    os << std::left << std::setw(16) << key.first << std::setw(12)
       << (key.second == static_cast<int>(PropertyKind::Positivity) ? "Positivity" : "Mass") << std::right
       << std::setw(7) << proof << std::setw(5) << c.ce << std::setw(5) << (frozen ? std::to_string(c.uc) : "--")
       << std::setw(5) << c.to << '\n';
  }
  if (any_frozen_proof) os << "* Certifies frozen surrogate only, not original model.\n";
  if (unknowns > 0) os << unknowns << " solver queries ended unknown or in error.\n";
  os << "Exact proofs hold for the compiled real-valued model with exactly rationalized weights.\n";

  std::map<std::pair<std::string, int>, std::map<std::string, double>> sev;
  std::vector<std::pair<std::string, int>> models;
  for (const auto& r : rows) {
    if (r.method == "z3-frozen") continue;
    const auto key = std::make_pair(r.model, static_cast<int>(r.property));
    if (!sev.count(key)) models.push_back(key);
    auto& m = sev[key];
    if (r.method == "z3-exact") {
      if (r.severity) m[r.method] = *r.severity;
    } else if (r.search_best) {
      m[r.method] = *r.search_best;
    }
  }
  if (!models.empty()) {
    os << "\nWorst severity found (mass: M(out)-M(in); positivity: -min out)\n";
    os << std::left << std::setw(16) << "Model" << std::setw(12) << "Property" << std::right << std::setw(12)
       << "z3-exact" << std::setw(12) << "grad" << std::setw(12) << "mc" << "  best\n";
    for (const auto& key : models) {
      const auto& m = sev[key];
      os << std::left << std::setw(16) << key.first << std::setw(12)
         << (key.second == static_cast<int>(PropertyKind::Positivity) ? "positivity" : "mass") << std::right;
      double best_val = -INFINITY;
      for (const auto& [method, value] : m) best_val = std::max(best_val, value);
      std::string best;
      for (const char* method : {"z3-exact", "grad", "mc"}) {
        auto it = m.find(method);
        std::ostringstream cell;
        if (it != m.end()) {
          cell << std::fixed << std::setprecision(4) << it->second;
          // Methods within 1e-6 of the best share the win.
          if (it->second >= best_val - 1e-6) best += (best.empty() ? "" : "=") + std::string(method);
        } else {
          cell << "-";
        }
        os << std::setw(12) << cell.str();
      }
      os << "  " << best << '\n';
    }
  }
  return os.str();
}

namespace {

const char* kPalette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a"};

class Svg {
 public:
  Svg(double w, double h) : w_(w), h_(h) {}
  void rect(double x, double y, double w, double h, const std::string& fill) {
    body_ << "<rect x='" << x << "' y='" << y << "' width='" << w << "' height='" << h << "' fill='" << fill
          << "'/>\n";
  }
  void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width = 1.0) {
    body_ << "<line x1='" << x1 << "' y1='" << y1 << "' x2='" << x2 << "' y2='" << y2 << "' stroke='" << stroke
          << "' stroke-width='" << width << "'/>\n";
  }
  void circle(double x, double y, double r, const std::string& fill) {
    body_ << "<circle cx='" << x << "' cy='" << y << "' r='" << r << "' fill='" << fill << "'/>\n";
  }
  void text(double x, double y, const std::string& s, int size = 11, const char* anchor = "middle",
            double rotate = 0.0) {
    body_ << "<text x='" << x << "' y='" << y << "' font-size='" << size << "' text-anchor='" << anchor
          << "' font-family='sans-serif'";
    if (rotate != 0.0) body_ << " transform='rotate(" << rotate << ' ' << x << ' ' << y << ")'";
    body_ << ">" << s << "</text>\n";
  }
  void save(const fs::path& path) const {
    std::ofstream out(path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w_ << "' height='" << h_ << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << body_.str() << "</svg>\n";
  }

 private:
  double w_, h_;
  std::ostringstream body_;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << v;
  return os.str();
}

/// Grouped bar chart; NaN entries are skipped.
void bar_chart(const fs::path& path, const std::string& title, const std::vector<std::string>& groups,
               const std::vector<std::string>& series, const std::vector<std::vector<double>>& values,
               const std::string& ylabel) {
  const double width = 120.0 + 60.0 * static_cast<double>(groups.size()) * (0.5 + 0.25 * series.size());
  const double height = 360.0;
  const double left = 60.0, right = 20.0, top = 40.0, bottom = 90.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  double lo = 0.0, hi = 0.0;
  for (const auto& row : values) {
    for (double v : row) {
      if (std::isnan(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi == lo) hi = lo + 1.0;
  auto y_of = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };

  Svg svg(width, height);
  svg.text(width / 2, 20, title, 13);
  svg.text(15, top + plot_h / 2, ylabel, 11, "middle", -90);
  svg.line(left, top, left, top + plot_h, "black");
  svg.line(left, y_of(0.0), left + plot_w, y_of(0.0), "black");
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    svg.line(left - 4, y_of(v), left, y_of(v), "black");
    svg.text(left - 6, y_of(v) + 4, fmt(v), 9, "end");
  }
  const double group_w = plot_w / static_cast<double>(groups.size());
  const double bar_w = group_w * 0.8 / static_cast<double>(series.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double x0 = left + group_w * static_cast<double>(g) + group_w * 0.1;
    for (std::size_t s = 0; s < series.size(); ++s) {
      const double v = values[g][s];
      if (std::isnan(v)) continue;
      const double y = std::min(y_of(v), y_of(0.0));
      svg.rect(x0 + bar_w * static_cast<double>(s), y, bar_w * 0.95, std::abs(y_of(v) - y_of(0.0)),
               kPalette[s % 4]);
    }
    svg.text(x0 + group_w * 0.4, top + plot_h + 14, groups[g], 9, "end", -40);
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const double x = left + 10 + 110.0 * static_cast<double>(s);
    svg.rect(x, height - 18, 10, 10, kPalette[s % 4]);
    svg.text(x + 14, height - 9, series[s], 10, "start");
  }
  svg.save(path);
}

}  // namespace

std::vector<fs::path> write_plots(const std::vector<ResultRow>& rows, const std::vector<TrainingRow>& training,
                                  const fs::path& dir) {
  std::vector<fs::path> written;
  if (rows.empty() && training.empty()) return written;
  fs::create_directories(dir);
  const std::vector<std::string> methods{"z3-exact", "grad", "mc"};

  for (auto kind : {PropertyKind::MassNonIncrease, PropertyKind::Positivity}) {
    std::vector<std::string> groups;
    std::map<std::string, std::vector<double>> by_model;
    for (const auto& r : rows) {
      if (r.property != kind || r.method == "z3-frozen") continue;
      if (!by_model.count(r.model)) {
        groups.push_back(r.model);
        by_model[r.model] = std::vector<double>(methods.size(), NAN);
      }
      const auto m = std::find(methods.begin(), methods.end(), r.method) - methods.begin();
      std::optional<double> v = r.method == "z3-exact" ? r.severity : r.search_best;
      // Positivity is drawn as the minimum output reached.
      if (v) by_model[r.model][static_cast<std::size_t>(m)] = kind == PropertyKind::Positivity ? -*v : *v;
    }
    if (groups.empty()) continue;
    std::vector<std::vector<double>> values;
    for (const auto& g : groups) values.push_back(by_model[g]);
    const bool mass = kind == PropertyKind::MassNonIncrease;
    const fs::path path = dir / (mass ? "severity_mass.svg" : "severity_positivity.svg");
    bar_chart(path, mass ? "Mass non-increase: worst severity found" : "Positivity: minimum output found", groups,
              {"Z3 exact (sound)", "gradient falsification", "MC"}, values,
              mass ? "M(f(u)) - M(u)" : "min f(u)");
    written.push_back(path);
  }

  // Solve time against N, one panel per property, one line per depth.
  std::vector<const ResultRow*> exact;
  for (const auto& r : rows) {
    if (r.method == "z3-exact") exact.push_back(&r);
  }
  if (!exact.empty()) {
    const double panel_w = 320, height = 300, top = 40, bottom = 50, left = 60;
    Svg svg(2 * panel_w + 40, height);
    double tmin = INFINITY, tmax = -INFINITY;
    int nmin = 1 << 20, nmax = 0;
    for (const auto* r : exact) {
      tmin = std::min(tmin, std::max(r->time_s, 1e-3));
      tmax = std::max(tmax, std::max(r->time_s, 1e-3));
      nmin = std::min(nmin, r->n);
      nmax = std::max(nmax, r->n);
    }
    const double lt0 = std::floor(std::log10(tmin)), lt1 = std::ceil(std::log10(tmax)) + (tmin == tmax ? 1 : 0);
    const double ln0 = std::log2(nmin), ln1 = std::log2(nmax) + (nmin == nmax ? 1 : 0);
    const double plot_w = panel_w - left - 10, plot_h = height - top - bottom;
    int p = 0;
    for (auto kind : {PropertyKind::MassNonIncrease, PropertyKind::Positivity}) {
      const double x0 = 20 + p * (panel_w + 10) + left;
      auto px = [&](int n) { return x0 + plot_w * (std::log2(n) - ln0) / (ln1 - ln0); };
      auto py = [&](double t) { return top + plot_h * (lt1 - std::log10(std::max(t, 1e-3))) / (lt1 - lt0); };
      svg.text(x0 + plot_w / 2, 22, kind == PropertyKind::MassNonIncrease ? "Mass" : "Positivity", 13);
      svg.line(x0, top, x0, top + plot_h, "black");
      svg.line(x0, top + plot_h, x0 + plot_w, top + plot_h, "black");
      for (double e = lt0; e <= lt1; e += 1.0) svg.text(x0 - 6, py(std::pow(10.0, e)) + 4, fmt(std::pow(10.0, e)), 9, "end");
      for (int n = nmin; n <= nmax; n *= 2) svg.text(px(n), top + plot_h + 14, "N=" + std::to_string(n), 9);
      svg.text(x0 - 42, top + plot_h / 2, "solve time [s]", 10, "middle", -90);
      std::map<int, std::map<int, std::vector<const ResultRow*>>> by_depth;
      for (const auto* r : exact) {
        if (r->property == kind) by_depth[r->depth][r->n].push_back(r);
      }
      int s = 0;
      for (const auto& [depth, by_n] : by_depth) {
        const std::string color = kPalette[s % 4];
        double prev_x = NAN, prev_y = NAN;
        for (const auto& [n, list] : by_n) {
          double mean = 0.0;
          for (const auto* r : list) {
            mean += r->time_s;
            svg.circle(px(n), py(r->time_s), r->verdict == VerdictKind::Timeout ? 5 : 3,
                       r->verdict == VerdictKind::Timeout ? "#999999" : color);
          }
          mean /= static_cast<double>(list.size());
          if (!std::isnan(prev_x)) svg.line(prev_x, prev_y, px(n), py(mean), color, 1.5);
          prev_x = px(n);
          prev_y = py(mean);
        }
        svg.rect(x0 + 10 + 60.0 * s, height - 18, 10, 10, color);
        svg.text(x0 + 24 + 60.0 * s, height - 9, "L=" + std::to_string(depth), 10, "start");
        ++s;
      }
      ++p;
    }
    const fs::path path = dir / "solve_time.svg";
    svg.save(path);
    written.push_back(path);
  }

  if (!training.empty()) {
    std::vector<std::string> groups;
    std::vector<std::vector<double>> values;
    for (const auto& t : training) {
      groups.push_back(t.model);
      values.push_back({t.test_mse});
    }
    const fs::path path = dir / "test_mse.svg";
    bar_chart(path, "Test MSE", groups, {"test MSE"}, values, "MSE");
    written.push_back(path);
  }
  return written;
}

void write_report(const std::vector<ResultRow>& rows, const std::vector<TrainingRow>& training, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream(dir / "results.csv") << results_csv(rows);
  if (!training.empty()) std::ofstream(dir / "training.csv") << training_csv(training);
  if (!rows.empty()) std::ofstream(dir / "summary.txt") << summary_table(rows);
  write_plots(rows, training, dir / "plots");
}

}  // namespace fnov
