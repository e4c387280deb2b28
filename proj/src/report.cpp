#include "g2lab/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace g2lab {

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::residual: return "residual";
    case Kind::reference: return "reference";
    case Kind::upper_bound: return "upper_bound";
    case Kind::lower_bound: return "lower_bound";
    case Kind::info: return "info";
  }
  return "?";
}

Kind kind_from_name(const std::string& s) {
  for (Kind k : {Kind::residual, Kind::reference, Kind::upper_bound, Kind::lower_bound, Kind::info})
    if (s == kind_name(k)) return k;
  throw std::invalid_argument("unknown record kind '" + s + "'");
}

bool evaluate_pass(const ReportRecord& r) {
  if (r.kind == Kind::info) return true;
  if (!std::isfinite(r.value)) return false;
  switch (r.kind) {
    case Kind::residual: return std::abs(r.value) <= r.tolerance;
    case Kind::reference: return r.expected && std::abs(r.value - *r.expected) <= r.tolerance;
    case Kind::upper_bound: return r.value <= r.tolerance;
    case Kind::lower_bound: return r.value >= r.tolerance;
    case Kind::info: return true;
  }
  return false;
}

const std::vector<MetricInfo>& metric_registry() {
  static const std::vector<MetricInfo> m{
      {"metric_identity_error", Kind::residual, 1e-12},
      {"volume_error", Kind::residual, 1e-12},
      {"phi_norm2", Kind::reference, 1e-12},
      {"contraction_identity_error", Kind::residual, 1e-8},
      {"metric_scaling_error", Kind::residual, 1e-10},
      {"hodge_scaling_error", Kind::residual, 1e-10},
      {"remainder_slope", Kind::reference, 0.3},
      {"sup_metric", Kind::info, 0.0},
      {"sup_inverse", Kind::info, 0.0},
      {"sup_hodge", Kind::info, 0.0},
      {"sampler_drift", Kind::upper_bound, 0.2},
      {"scalar_curvature", Kind::reference, 1e-8},
      {"torsion_norm2", Kind::reference, 1e-8},
      {"riemann_norm", Kind::residual, 1e-10},
      {"torsion_norm", Kind::residual, 1e-10},
      {"riemann_symmetry", Kind::residual, 1e-8},
      {"torsion_scaling_error", Kind::residual, 1e-10},
      {"laplacian_scaling_error", Kind::residual, 1e-10},
      {"flow_rhs_norm", Kind::residual, 1e-10},
      {"metric_residual", Kind::info, 0.0},
      {"step_error", Kind::residual, 1e-8},
      {"fitted_order", Kind::lower_bound, 1.9},
      {"min_pairwise_order", Kind::lower_bound, 1.9},
      {"volume_increasing", Kind::reference, 0.0},
      {"soliton_phi_residual", Kind::residual, 1e-6},
      {"soliton_metric_residual", Kind::residual, 1e-6},
      {"trace_residual", Kind::residual, 1e-8},
      {"laplacian_f", Kind::reference, 1e-8},
      {"E_sup", Kind::residual, 1e-9},
      {"h_minus_r", Kind::residual, 1e-10},
      {"envelope_violations", Kind::reference, 0.0},
      {"comparability", Kind::info, 0.0},
      {"fitted_constant", Kind::info, 0.0},
      {"constant_drift", Kind::upper_bound, 0.3},
      {"block_exponent", Kind::upper_bound, -1.7},
      {"heat_kernel_residual", Kind::residual, 1e-8},
      {"h2_formula_gap", Kind::residual, 1e-6},
      {"h2_stated_gap", Kind::info, 0.0},
      {"divergence_residual", Kind::residual, 1e-6},
      {"nonfinite_ratios", Kind::reference, 0.0},
      {"ratio_variation", Kind::upper_bound, 2.0},
      {"refinement_gap", Kind::upper_bound, 0.01},
      {"min_ratio", Kind::info, 0.0},
      {"max_ratio", Kind::info, 0.0},
      {"decay_slope", Kind::upper_bound, 0.0},
      {"decay_r2", Kind::lower_bound, 0.95},
      {"stirling_gap", Kind::residual, 1e-8},
      {"stirling_min_constant", Kind::info, 0.0},
      {"cutoff_constant", Kind::info, 0.0},
      {"case_error", Kind::reference, 0.0},
  };
  return m;
}

bool is_known_metric(const std::string& name) {
  for (const auto& m : metric_registry())
    if (m.name == name) return true;
  return false;
}

const MetricInfo& metric_info(const std::string& name) {
  for (const auto& m : metric_registry())
    if (m.name == name) return m;
  throw std::logic_error("unregistered metric '" + name + "'");
}

double series_slope(const Series& s) {
  const double n = double(s.points.size());
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : s.points) {
    mx += x / n;
    my += y / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : s.points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  return sxy / sxx;
}

bool SuiteReport::all_pass() const { return failures() == 0; }

std::size_t SuiteReport::failures() const {
  std::size_t n = 0;
  for (const auto& r : records) n += !r.pass;
  return n;
}

namespace {

using nlohmann::json;

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double from_num(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == '/' || c == ' ' || c == ',') c = '_';
  return s;
}

}  // namespace

void write_json(std::ostream& os, const SuiteReport& r, bool timings) {
  json doc;
  doc["schema"] = "g2lab-report/1";
  doc["suite"] = r.suite;
  doc["seed"] = r.seed;
  doc["config_hash"] = r.config_hash;
  doc["summary"] = {{"records", r.records.size()}, {"failures", r.failures()}};
  json recs = json::array();
  for (const auto& x : r.records) {
    json j;
    j["suite"] = x.suite;
    j["case"] = x.case_name;
    j["anchor"] = x.anchor;
    j["metric"] = x.metric;
    j["value"] = num(x.value);
    j["expected"] = x.expected ? num(*x.expected) : json(nullptr);
    j["tolerance"] = num(x.tolerance);
    j["kind"] = kind_name(x.kind);
    j["pass"] = x.pass;
    if (timings) j["wall_time"] = x.wall_time;
    recs.push_back(std::move(j));
  }
  doc["records"] = std::move(recs);
  os << doc.dump(2) << '\n';
}

void write_csv(std::ostream& os, const SuiteReport& r, bool timings) {
  os << "suite,case,anchor,metric,value,expected,tolerance,kind,pass";
  if (timings) os << ",wall_time";
  os << '\n';
  for (const auto& x : r.records) {
    os << x.suite << ',' << x.case_name << ',' << x.anchor << ',' << x.metric << ',' << fmt(x.value) << ','
       << (x.expected ? fmt(*x.expected) : "") << ',' << fmt(x.tolerance) << ',' << kind_name(x.kind) << ','
       << (x.pass ? "true" : "false");
    if (timings) os << ',' << fmt(x.wall_time);
    os << '\n';
  }
}

void write_report(const SuiteReport& r, const std::string& path, const std::string& format, bool timings) {
  if (format != "json" && format != "csv") throw std::invalid_argument("format must be json or csv");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  if (format == "json")
    write_json(out, r, timings);
  else
    write_csv(out, r, timings);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

SuiteReport read_json_report(std::istream& is) {
  const json doc = json::parse(is);
  SuiteReport r;
  r.suite = doc.at("suite").get<std::string>();
  r.seed = doc.at("seed").get<std::uint64_t>();
  r.config_hash = doc.at("config_hash").get<std::string>();
  for (const auto& j : doc.at("records")) {
    ReportRecord x;
    x.suite = j.at("suite").get<std::string>();
    x.case_name = j.at("case").get<std::string>();
    x.anchor = j.at("anchor").get<std::string>();
    x.metric = j.at("metric").get<std::string>();
    x.value = from_num(j.at("value"));
    if (!j.at("expected").is_null()) x.expected = j.at("expected").get<double>();
    x.tolerance = from_num(j.at("tolerance"));
    x.kind = kind_from_name(j.at("kind").get<std::string>());
    x.pass = j.at("pass").get<bool>();
    if (j.contains("wall_time")) x.wall_time = j.at("wall_time").get<double>();
    r.records.push_back(std::move(x));
  }
  return r;
}

SuiteReport read_json_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_json_report(in);
}

std::vector<std::string> emit_plot_data(const std::vector<Series>& series, const std::string& selector,
                                        const std::string& dir) {
  std::vector<const Series*> hits;
  for (const auto& s : series) {
    const std::string full = s.family + "/" + s.name;
    if (selector == "all" || s.family == selector || full.rfind(selector, 0) == 0) hits.push_back(&s);
  }
  if (hits.empty()) throw EmptySelection("no plot series match '" + selector + "'");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::vector<std::string> paths;
  for (const Series* s : hits) {
    const std::string path = (std::filesystem::path(dir) / (sanitize(s->family) + "__" + sanitize(s->name) + ".dat")).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "# " << s->x_label << ' ' << s->y_label << '\n';
    for (const auto& [x, y] : s->points) out << fmt(x) << ' ' << fmt(y) << '\n';
    if (!out) throw IoError("write to '" + path + "' failed");
    paths.push_back(path);
  }
  return paths;
}

std::vector<std::string> emit_sweep_tables(const std::vector<SweepTable>& sweeps, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::vector<std::string> paths;
  for (const auto& t : sweeps) {
    const std::string path = (std::filesystem::path(dir) / ("sweep_" + sanitize(t.name) + ".csv")).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_sweep_csv(out, t.rows);
    if (!out) throw IoError("write to '" + path + "' failed");
    paths.push_back(path);
  }
  return paths;
}

}  // namespace g2lab
