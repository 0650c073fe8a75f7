#include "helmstab/records.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace helmstab {

namespace {

using Getter = std::function<double(const StabilityRecord&)>;

const std::vector<std::pair<std::string, Getter>>& numeric_fields() {
  static const std::vector<std::pair<std::string, Getter>> f = {
      {"lambda_index", [](const StabilityRecord& r) { return double(r.lambda_index); }},
      {"level_index", [](const StabilityRecord& r) { return double(r.level_index); }},
      {"lambda", [](const StabilityRecord& r) { return r.lambda; }},
      {"level", [](const StabilityRecord& r) { return r.level; }},
      {"ok", [](const StabilityRecord& r) { return r.ok ? 1.0 : 0.0; }},
      {"degenerate", [](const StabilityRecord& r) { return r.degenerate ? 1.0 : 0.0; }},
      {"admissible", [](const StabilityRecord& r) { return r.admissible ? 1.0 : 0.0; }},
      {"e_lambda", [](const StabilityRecord& r) { return r.e_lambda; }},
      {"distance", [](const StabilityRecord& r) { return r.distance; }},
      {"b_lambda", [](const StabilityRecord& r) { return r.b_lambda; }},
      {"delta_map", [](const StabilityRecord& r) { return r.delta_map; }},
      {"delta_injected", [](const StabilityRecord& r) { return r.delta_injected; }},
      {"delta", [](const StabilityRecord& r) { return r.delta; }},
      {"C", [](const StabilityRecord& r) { return r.C; }},
      {"varkappa", [](const StabilityRecord& r) { return r.varkappa; }},
      {"tau", [](const StabilityRecord& r) { return r.tau; }},
      {"s", [](const StabilityRecord& r) { return r.s; }},
      {"epsilon", [](const StabilityRecord& r) { return r.epsilon; }},
      {"log_epsilon", [](const StabilityRecord& r) { return r.log_epsilon; }},
      {"tau_overridden", [](const StabilityRecord& r) { return r.tau_overridden ? 1.0 : 0.0; }},
      {"s_overridden", [](const StabilityRecord& r) { return r.s_overridden ? 1.0 : 0.0; }},
      {"modes", [](const StabilityRecord& r) { return double(r.modes); }},
      {"herr", [](const StabilityRecord& r) { return r.herr; }},
      {"herr_noiseless", [](const StabilityRecord& r) { return r.herr_noiseless; }},
      {"herr_rel", [](const StabilityRecord& r) { return r.herr_rel; }},
      {"dq_norm", [](const StabilityRecord& r) { return r.dq_norm; }},
      {"tail", [](const StabilityRecord& r) { return r.tail; }},
      {"tail_bound", [](const StabilityRecord& r) { return r.tail_bound; }},
      {"triple_log_x", [](const StabilityRecord& r) { return r.triple_log_x; }},
      {"prefactor", [](const StabilityRecord& r) { return r.prefactor; }},
      {"phi", [](const StabilityRecord& r) { return r.phi; }},
      {"modulus", [](const StabilityRecord& r) { return r.modulus; }},
      {"cgo_solves", [](const StabilityRecord& r) { return double(r.cgo.solves); }},
      {"cgo_max_iterations", [](const StabilityRecord& r) { return double(r.cgo.max_iterations); }},
      {"cgo_max_residual", [](const StabilityRecord& r) { return r.cgo.max_residual; }},
      {"cgo_max_w_im_xi", [](const StabilityRecord& r) { return r.cgo.max_w_times_im_xi; }},
      {"cgo_max_remainder", [](const StabilityRecord& r) { return r.cgo.max_remainder; }},
      {"cgo_max_remainder_bound", [](const StabilityRecord& r) { return r.cgo.max_remainder_bound; }},
      {"cgo_min_im_xi", [](const StabilityRecord& r) { return r.cgo.min_im_xi; }},
  };
  return f;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote(const std::string& s) {
  std::string o = "\"";
  for (char c : s) {
    if (c == '"') o += '"';
    o += c == '\n' ? ' ' : c;
  }
  return o + "\"";
}

nlohmann::json jnum(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::vector<std::string> record_columns() {
  std::vector<std::string> c{"variant"};
  for (const auto& [name, g] : numeric_fields()) c.push_back(name);
  c.push_back("error_kind");
  c.push_back("error_message");
  return c;
}

double record_field(const StabilityRecord& r, const std::string& name) {
  for (const auto& [n, g] : numeric_fields())
    if (n == name) return g(r);
  throw ConfigError("unknown record field '" + name + "'");
}

std::string records_csv(const std::vector<StabilityRecord>& rs) {
  std::ostringstream os;
  const auto cols = record_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  for (const auto& r : rs) {
    os << r.variant;
    for (const auto& [n, g] : numeric_fields()) os << "," << num(g(r));
    os << "," << r.error_kind << "," << quote(r.error_message) << "\n";
  }
  return os.str();
}

void write_records_csv(const std::string& path, const std::vector<StabilityRecord>& r) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path);
  os << records_csv(r);
}

void write_records_json(const std::string& path, const std::vector<StabilityRecord>& rs, const std::string& extra) {
  nlohmann::json j;
  j["run"] = nlohmann::json::parse(extra);
  j["records"] = nlohmann::json::array();
  for (const auto& r : rs) {
    nlohmann::json o;
    o["variant"] = r.variant;
    for (const auto& [n, g] : numeric_fields()) o[n] = jnum(g(r));
    o["error_kind"] = r.error_kind;
    o["error_message"] = r.error_message;
    o["timings"] = {{"setup", r.t_setup}, {"qhat", r.t_qhat}, {"total", r.t_total}};
    j["records"].push_back(o);
  }
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path);
  os << j.dump(2) << "\n";
}

std::vector<double> Table::column(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c)
    if (columns[c] == name) {
      std::vector<double> out;
      for (const auto& row : rows) out.push_back(c < row.size() ? row[c] : std::nan(""));
      return out;
    }
  throw ConfigError("no column '" + name + "'");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool q = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (q) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        q = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      q = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

Table read_csv_table(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path);
  Table t;
  std::string line;
  if (!std::getline(is, line)) throw Error(path + " is empty");
  t.columns = split_csv_line(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split_csv_line(line)) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      row.push_back(end && *end == '\0' && !cell.empty() ? v : std::nan(""));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

FitMode parse_fit_mode(const std::string& s) {
  if (s == "loglog") return FitMode::loglog;
  if (s == "semilogy") return FitMode::semilogy;
  if (s == "semilogx") return FitMode::semilogx;
  if (s == "linear") return FitMode::linear;
  throw ConfigError("unknown fit mode '" + s + "'");
}

std::string fit_mode_name(FitMode m) {
  switch (m) {
    case FitMode::loglog: return "loglog";
    case FitMode::semilogy: return "semilogy";
    case FitMode::semilogx: return "semilogx";
    case FitMode::linear: return "linear";
  }
  return "?";
}

FitResult fit_scaling(const std::vector<double>& x, const std::vector<double>& y, FitMode mode) {
  if (x.size() != y.size()) throw ShapeError("fit needs matching x and y");
  const bool lx = mode == FitMode::loglog || mode == FitMode::semilogx;
  const bool ly = mode == FitMode::loglog || mode == FitMode::semilogy;
  std::vector<double> X, Y;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    if ((lx && x[i] <= 0.0) || (ly && y[i] <= 0.0)) continue;
    X.push_back(lx ? std::log(x[i]) : x[i]);
    Y.push_back(ly ? std::log(y[i]) : y[i]);
  }
  FitResult f;
  f.points = static_cast<int>(X.size());
  if (f.points < 2) throw DomainError("fit needs at least two usable points");
  const double n = f.points;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    mx += X[i];
    my += Y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    sxx += (X[i] - mx) * (X[i] - mx);
    sxy += (X[i] - mx) * (Y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("fit needs at least two distinct x values");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (f.points > 2) {
    double ss = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
      const double r = Y[i] - f.intercept - f.slope * X[i];
      ss += r * r;
    }
    f.stderr_slope = std::sqrt(ss / (n - 2) / sxx);
  }
  return f;
}

FitResult fit_scaling(const std::vector<StabilityRecord>& rs, const std::string& x, const std::string& y,
                      FitMode mode) {
  std::vector<double> X, Y;
  for (const auto& r : rs) {
    if (!r.ok) continue;
    X.push_back(record_field(r, x));
    Y.push_back(record_field(r, y));
  }
  return fit_scaling(X, Y, mode);
}

}  // namespace helmstab
