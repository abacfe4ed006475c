#pragma once

// Experiment reports: JSON (schema-versioned, full fidelity) and a per-ball
// CSV table, plus plot-ready projections.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "planck/manifold.hpp"

namespace planck {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kToolVersion = "planck-lab 1.0.0";

/// Shortest decimal that round-trips to the same double.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct PackingSummary {
  std::size_t J = 0;
  std::size_t K = 0;
  double fraction() const { return J == 0 ? 0.0 : static_cast<double>(K) / static_cast<double>(J); }
};

/// One row of the per-ball table.
struct BallRow {
  std::size_t ball_index = 0;
  Point center;
  double R = 0.0;
  double r = 0.0;
  double g = 0.0;
  bool selected = false;
  bool nodal_found = false;
  std::optional<Point> q;
  double nodal_residual = 0.0;
  std::optional<double> local_mass;
  std::optional<double> rho;
  std::string classification;
};

/// Free-form table (sweeps, per-k rows, per-family rows).
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;

  void add(std::vector<Json> row) {
    if (row.size() != columns.size()) throw std::logic_error("Table::add: column count mismatch");
    rows.push_back(std::move(row));
  }
  std::optional<std::size_t> column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    return std::nullopt;
  }
};

struct ExperimentReport {
  std::string kind;
  std::string manifold;
  std::string family;
  double eigenvalue_sq = 0.0;
  Json parameters = Json::object();
  Json diagnostics = Json::object();
  std::optional<PackingSummary> packing;
  std::vector<BallRow> balls;
  Table table;
  std::vector<Check> checks;
  Json config = Json::object();  // resolved run configuration, echoed

  bool passed() const {
    for (const Check& c : checks) {
      if (!c.passed) return false;
    }
    return true;
  }
  void check(std::string name, bool ok, std::string detail = {}) {
    checks.push_back({std::move(name), ok, std::move(detail)});
  }
};

namespace detail {

inline Json point_json(Point p) { return Json::array({p[0], p[1]}); }
inline Point point_from(const Json& j) { return Point{{j.at(0).get<double>(), j.at(1).get<double>()}}; }

// JSON numbers must be finite; non-finite values are written as strings.
inline Json number(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}
inline double number_from(const Json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  return NAN;
}

}  // namespace detail

inline Json to_json(const ExperimentReport& r) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["tool_version"] = kToolVersion;
  j["kind"] = r.kind;
  j["manifold"] = r.manifold;
  j["family"] = r.family;
  j["eigenvalue_sq"] = r.eigenvalue_sq;
  j["config"] = r.config;
  j["parameters"] = r.parameters;
  j["diagnostics"] = r.diagnostics;
  if (r.packing) {
    j["packing"] = {{"J", r.packing->J}, {"K", r.packing->K}, {"fraction", r.packing->fraction()}};
  }
  Json balls = Json::array();
  for (const BallRow& b : r.balls) {
    Json e;
    e["ball_index"] = b.ball_index;
    e["center"] = detail::point_json(b.center);
    e["R"] = b.R;
    e["r"] = b.r;
    e["g"] = b.g;
    e["selected"] = b.selected;
    e["nodal_found"] = b.nodal_found;
    e["q"] = b.q ? detail::point_json(*b.q) : Json(nullptr);
    e["nodal_residual"] = b.nodal_residual;
    e["local_mass"] = b.local_mass ? Json(*b.local_mass) : Json(nullptr);
    e["rho"] = b.rho ? Json(*b.rho) : Json(nullptr);
    e["classification"] = b.classification;
    balls.push_back(std::move(e));
  }
  j["balls"] = std::move(balls);
  Json rows = Json::array();
  for (const auto& row : r.table.rows) {
    Json jr = Json::array();
    for (const Json& cell : row) jr.push_back(cell.is_number_float() ? detail::number(cell.get<double>()) : cell);
    rows.push_back(std::move(jr));
  }
  j["table"] = {{"columns", r.table.columns}, {"rows", std::move(rows)}};
  Json checks = Json::array();
  for (const Check& c : r.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["checks"] = std::move(checks);
  j["passed"] = r.passed();
  return j;
}

inline ExperimentReport report_from_json(const Json& j) {
  if (j.value("schema_version", 0) != kReportSchemaVersion) {
    throw std::runtime_error("report: unsupported schema_version");
  }
  ExperimentReport r;
  r.kind = j.at("kind").get<std::string>();
  r.manifold = j.at("manifold").get<std::string>();
  r.family = j.at("family").get<std::string>();
  r.eigenvalue_sq = j.at("eigenvalue_sq").get<double>();
  r.config = j.value("config", Json::object());
  r.parameters = j.value("parameters", Json::object());
  r.diagnostics = j.value("diagnostics", Json::object());
  if (j.contains("packing")) {
    r.packing = PackingSummary{j["packing"].at("J").get<std::size_t>(), j["packing"].at("K").get<std::size_t>()};
  }
  for (const Json& e : j.value("balls", Json::array())) {
    BallRow b;
    b.ball_index = e.at("ball_index").get<std::size_t>();
    b.center = detail::point_from(e.at("center"));
    b.R = e.at("R").get<double>();
    b.r = e.at("r").get<double>();
    b.g = e.at("g").get<double>();
    b.selected = e.at("selected").get<bool>();
    b.nodal_found = e.at("nodal_found").get<bool>();
    if (!e.at("q").is_null()) b.q = detail::point_from(e["q"]);
    b.nodal_residual = e.at("nodal_residual").get<double>();
    if (!e.at("local_mass").is_null()) b.local_mass = e["local_mass"].get<double>();
    if (!e.at("rho").is_null()) b.rho = e["rho"].get<double>();
    b.classification = e.at("classification").get<std::string>();
    r.balls.push_back(std::move(b));
  }
  if (j.contains("table")) {
    r.table.columns = j["table"].at("columns").get<std::vector<std::string>>();
    for (const Json& row : j["table"].at("rows")) {
      std::vector<Json> cells(row.begin(), row.end());
      r.table.rows.push_back(std::move(cells));
    }
  }
  for (const Json& c : j.value("checks", Json::array())) {
    r.checks.push_back({c.at("name").get<std::string>(), c.at("passed").get<bool>(),
                        c.value("detail", std::string{})});
  }
  return r;
}

namespace detail {

inline std::string csv_cell(const Json& cell) {
  if (cell.is_null()) return "";
  if (cell.is_boolean()) return cell.get<bool>() ? "1" : "0";
  if (cell.is_number_integer()) return std::to_string(cell.get<long long>());
  if (cell.is_number_unsigned()) return std::to_string(cell.get<unsigned long long>());
  if (cell.is_number()) return format_number(cell.get<double>());
  if (cell.is_string()) {
    const std::string s = cell.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
      if (ch == '"') out += '"';
      out += ch;
    }
    return out + "\"";
  }
  return cell.dump();
}

inline void csv_preamble(std::ostringstream& out, const ExperimentReport& r) {
  out << "# " << kToolVersion << "\n";
  out << "# kind=" << r.kind << " manifold=" << r.manifold << " family=" << r.family << "\n";
  out << "# config=" << r.config.dump() << "\n";
}

}  // namespace detail

/// Per-ball CSV (fixed column order, LF endings).
inline std::string balls_csv(const ExperimentReport& r) {
  std::ostringstream out;
  detail::csv_preamble(out, r);
  out << "ball_index,center_0,center_1,R,r,g_j,selected,nodal_found,q_0,q_1,local_mass,rho,"
         "classification\n";
  for (const BallRow& b : r.balls) {
    out << b.ball_index << ',' << format_number(b.center[0]) << ',' << format_number(b.center[1])
        << ',' << format_number(b.R) << ',' << format_number(b.r) << ',' << format_number(b.g)
        << ',' << (b.selected ? 1 : 0) << ',' << (b.nodal_found ? 1 : 0) << ','
        << (b.q ? format_number((*b.q)[0]) : "") << ',' << (b.q ? format_number((*b.q)[1]) : "")
        << ',' << (b.local_mass ? format_number(*b.local_mass) : "") << ','
        << (b.rho ? format_number(*b.rho) : "") << ',' << b.classification << '\n';
  }
  return out.str();
}

/// Generic table CSV.
inline std::string table_csv(const ExperimentReport& r) {
  std::ostringstream out;
  detail::csv_preamble(out, r);
  for (std::size_t i = 0; i < r.table.columns.size(); ++i) {
    out << (i ? "," : "") << r.table.columns[i];
  }
  out << '\n';
  for (const auto& row : r.table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << detail::csv_cell(row[i]);
    out << '\n';
  }
  return out.str();
}

enum class PlotKind { RhoVsDelta, RhoHistogram, RatioVsK };

inline PlotKind plot_kind_from_string(const std::string& s) {
  if (s == "rho_vs_delta") return PlotKind::RhoVsDelta;
  if (s == "rho_histogram") return PlotKind::RhoHistogram;
  if (s == "ratio_vs_k") return PlotKind::RatioVsK;
  throw std::invalid_argument("unknown plot kind '" + s + "'");
}

/// Two- or three-column CSV projection of a report; columns are named in a
/// leading comment line.
inline std::string emit_plotdata(const ExperimentReport& r, PlotKind kind, int bins = 20) {
  std::ostringstream out;
  auto column = [&](const std::string& name) {
    const auto c = r.table.column(name);
    if (!c) throw std::invalid_argument("plotdata: report table lacks column '" + name + "'");
    return *c;
  };
  switch (kind) {
    case PlotKind::RhoVsDelta: {
      if (r.kind != "sweep") throw std::invalid_argument("plotdata rho_vs_delta needs a sweep report");
      const std::size_t cd = column("delta"), cr = column("rho_max");
      std::vector<std::pair<double, double>> pts;
      for (const auto& row : r.table.rows) {
        pts.emplace_back(row[cd].get<double>(), detail::number_from(row[cr]));
      }
      std::sort(pts.begin(), pts.end());
      out << "# delta,rho_max\n";
      for (const auto& [d, v] : pts) out << format_number(d) << ',' << format_number(v) << '\n';
      break;
    }
    case PlotKind::RhoHistogram: {
      std::vector<double> rho;
      for (const BallRow& b : r.balls) {
        if (b.rho) rho.push_back(*b.rho);
      }
      if (r.balls.empty()) throw std::invalid_argument("plotdata rho_histogram needs per-ball rows");
      if (bins < 1) throw std::invalid_argument("plotdata: bins must be >= 1");
      double lo = 0.0, hi = 0.0;
      if (!rho.empty()) {
        lo = *std::min_element(rho.begin(), rho.end());
        hi = *std::max_element(rho.begin(), rho.end());
      }
      if (hi <= lo) hi = lo + 1.0;
      std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
      for (double v : rho) {
        auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * bins);
        counts[std::min(b, counts.size() - 1)] += 1;
      }
      out << "# bin_lo,bin_hi,count (balls without a mass record: "
          << r.balls.size() - rho.size() << ")\n";
      for (int i = 0; i < bins; ++i) {
        out << format_number(lo + (hi - lo) * i / bins) << ','
            << format_number(lo + (hi - lo) * (i + 1) / bins) << ',' << counts[i] << '\n';
      }
      break;
    }
    case PlotKind::RatioVsK: {
      if (r.kind != "hwexample") throw std::invalid_argument("plotdata ratio_vs_k needs an hwexample report");
      const std::size_t ck = column("k"), cr = column("ratio"), cn = column("ratio_over_sqrt_k");
      out << "# k,ratio,ratio_over_sqrt_k\n";
      for (const auto& row : r.table.rows) {
        out << row[ck].get<long long>() << ',' << format_number(detail::number_from(row[cr])) << ','
            << format_number(detail::number_from(row[cn])) << '\n';
      }
      break;
    }
  }
  return out.str();
}

}  // namespace planck
