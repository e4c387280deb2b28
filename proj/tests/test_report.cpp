#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "g2lab/g2.hpp"
#include "g2lab/suites.hpp"

using namespace g2lab;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("g2lab_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

ReportRecord rec(const std::string& metric, double value, std::optional<double> expected = {}) {
  const MetricInfo& m = metric_info(metric);
  ReportRecord r;
  r.suite = "algebra";
  r.case_name = "c";
  r.anchor = "algebra.calibration";
  r.metric = metric;
  r.value = value;
  r.expected = expected;
  r.tolerance = m.tolerance;
  r.kind = m.kind;
  r.pass = evaluate_pass(r);
  return r;
}

template <class E>
E config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const E& e) {
    return e;
  }
  FAIL("no error for: " << text);
  return E(0, "", "");
}

SuiteConfig small_algebra() {
  SuiteConfig c;
  c.suite = "algebra";
  c.seed = 7;
  c.samples = 100;
  c.contraction_samples = 20;
  return c;
}

}  // namespace

TEST_CASE("config parsing") {
  const SuiteConfig c = parse_config(R"(# comment
[run]
suite = carleman
seed = 42

[carleman]
alphas = 1, 2, 4
a = 0.05
functions = centred, narrow
variant = gaussian_log

[tolerance]
refinement_gap = 0.02

[output]
format = csv
)");
  CHECK(c.suite == "carleman");
  CHECK(c.seed == 42);
  CHECK(c.carleman.alphas == std::vector<double>{1, 2, 4});
  CHECK(c.carleman.as == std::vector<double>{0.05});
  CHECK(c.carleman.functions == std::vector<std::string>{"centred", "narrow"});
  CHECK(c.carleman.variant == CarlemanVariant::gaussian_log);
  CHECK(c.tolerances.at("refinement_gap") == 0.02);
  CHECK(c.format == "csv");
}

TEST_CASE("config errors name the line and field") {
  auto e = config_error<ConfigError>("[run]\nseed = 1\n[grid]\nnodez = 3\n");
  CHECK(e.line == 4);
  CHECK(e.field == "grid.nodez");
  e = config_error<ConfigError>("[nowhere]\n");
  CHECK(e.line == 1);
  e = config_error<ConfigError>("[run]\nseed = 1\nseed = 2\n");
  CHECK(e.line == 3);
  CHECK(e.field == "run.seed");
  e = config_error<ConfigError>("seed = 1\n");
  CHECK(e.line == 1);
  e = config_error<ConfigError>("[algebra]\nepsilon = abc\n");
  CHECK(e.field == "algebra.epsilon");
  e = config_error<ConfigError>("[carleman]\nfunctions = centred, wobbly\n");
  CHECK(e.field == "carleman.functions");
  e = config_error<ConfigError>("[tolerance]\nno_such_metric = 1\n");
  CHECK(e.field == "tolerance.no_such_metric");
  e = config_error<ConfigError>("[carleman]\ndivergence_nodes = 160\n");
  CHECK(e.field == "carleman.divergence_nodes");
  CHECK_THROWS_AS(load_config("/nonexistent/g2lab.cfg"), ConfigError);
}

TEST_CASE("config hash ignores seed and output") {
  SuiteConfig a, b;
  b.seed = 5;
  b.out = "x.json";
  b.format = "csv";
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b.epsilon = 0.04;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(parse_config("")) == config_hash(a));
}

TEST_CASE("pass rules by kind") {
  CHECK(rec("volume_error", 1e-13).pass);
  CHECK_FALSE(rec("volume_error", -1e-11).pass);
  CHECK(rec("phi_norm2", 7.0, 7.0).pass);
  CHECK_FALSE(rec("phi_norm2", 7.0).pass);
  CHECK(rec("sampler_drift", 0.1).pass);
  CHECK_FALSE(rec("sampler_drift", 0.3).pass);
  CHECK(rec("decay_r2", 0.99).pass);
  CHECK_FALSE(rec("decay_r2", 0.9).pass);
  CHECK(rec("sup_metric", NAN).pass);
  CHECK_FALSE(rec("volume_error", NAN).pass);
  CHECK_THROWS_AS(metric_info("unregistered"), std::logic_error);
}

TEST_CASE("json round trip and csv layout") {
  SuiteReport r;
  r.suite = "algebra";
  r.seed = 3;
  r.config_hash = "0123456789abcdef";
  r.records = {rec("volume_error", 1e-13), rec("phi_norm2", 7.0, 7.0), rec("remainder_slope", NAN, 3.0)};
  r.records[0].wall_time = 1.5;
  std::stringstream js;
  write_json(js, r);
  CHECK(js.str().find("wall_time") == std::string::npos);
  const SuiteReport back = read_json_report(js);
  REQUIRE(back.records.size() == 3);
  CHECK(back.records[0].value == r.records[0].value);
  CHECK(back.records[1].expected == 7.0);
  CHECK(std::isnan(back.records[2].value));
  CHECK_FALSE(back.records[2].pass);
  CHECK(back.records[1].kind == Kind::reference);
  CHECK(back.config_hash == r.config_hash);
  // Keys within each object are sorted.
  const std::string s = js.str();
  CHECK(s.find("\"config_hash\"") < s.find("\"records\""));
  CHECK(s.find("\"anchor\"") < s.find("\"case\""));

  std::stringstream ts;
  write_json(ts, r, true);
  CHECK(read_json_report(ts).records[0].wall_time == 1.5);

  std::ostringstream cs;
  write_csv(cs, r);
  const std::string csv = cs.str();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(csv.rfind("suite,case,anchor,metric,value,expected,tolerance,kind,pass\n", 0) == 0);

  SuiteReport empty;
  std::stringstream es;
  write_json(es, empty);
  CHECK(read_json_report(es).records.empty());
  CHECK(empty.all_pass());
  CHECK_THROWS_AS(write_report(r, "/nonexistent/dir/report.json", "json"), IoError);
}

TEST_CASE("plot data") {
  Series a{"convergence", "demo", "log_h", "log_e", {}};
  for (int k = 0; k < 6; ++k) a.points.emplace_back(-0.5 * k, 0.3 - 2.0 * 0.5 * k + 0.01 * (k % 2));
  Series b{"decay", "s=0.1", "rho2", "log_norm", {{1.0, 2.0}, {2.0, 1.0}}};
  const std::string dir = temp_dir("plots");
  const auto paths = emit_plot_data({a, b}, "convergence", dir);
  REQUIRE(paths.size() == 1);
  // Slope recomputed from the emitted file.
  std::ifstream in(paths[0]);
  std::string header;
  std::getline(in, header);
  CHECK(header == "# log_h log_e");
  Series reread;
  double x, y;
  while (in >> x >> y) reread.points.emplace_back(x, y);
  CHECK(reread.points.size() == 6);
  CHECK(std::abs(series_slope(reread) - series_slope(a)) <= 1e-6);
  CHECK(emit_plot_data({a, b}, "all", dir).size() == 2);
  CHECK(emit_plot_data({a, b}, "decay/s=", dir).size() == 1);
  CHECK_THROWS_AS(emit_plot_data({a, b}, "ratio_sweep", dir), EmptySelection);
}

TEST_CASE("suite reruns are byte-identical") {
  const SuiteConfig c = small_algebra();
  std::ostringstream a, b;
  const SuiteReport ra = run_suite(c);
  write_json(a, ra);
  write_json(b, run_suite(c));
  CHECK(a.str() == b.str());
  CHECK(ra.all_pass());
  CHECK(ra.config_hash == config_hash(c));
  SuiteConfig other = c;
  other.seed = 8;
  std::ostringstream d;
  write_json(d, run_suite(other));
  CHECK(d.str() != a.str());
  // Tolerance overrides reach the records.
  SuiteConfig strict = c;
  strict.tolerances["remainder_slope"] = 1e-6;
  const SuiteReport rs = run_suite(strict);
  CHECK_FALSE(rs.all_pass());
}

TEST_CASE("shrinker suite reports the Fowdar scalar curvature") {
  SuiteConfig c;
  c.suite = "shrinker";
  c.model = "fowdar";
  const SuiteReport r = run_suite(c);
  bool found = false;
  for (const auto& x : r.records)
    if (x.case_name == "fowdar/soliton" && x.metric == "scalar_curvature") {
      found = true;
      CHECK(std::abs(x.value + 0.75) <= 1e-8);
      CHECK(x.pass);
    }
  CHECK(found);
  CHECK(r.all_pass());
}

TEST_CASE("sweep tables have one row per parameter triple") {
  SuiteConfig c;
  c.suite = "carleman";
  c.carleman.functions = {"inner"};
  c.carleman.alphas = {1, 2, 4};
  c.carleman.as = {0.05, 0.1};
  c.carleman.rhos = {20.0, 22.0};
  c.carleman.decay_s = {0.1};
  c.carleman.divergence_nodes = {41, 81};
  const SuiteReport r = run_suite(c);
  REQUIRE(r.sweeps.size() == 1);
  CHECK(r.sweeps[0].rows.size() == 12);
  const std::string dir = temp_dir("sweeps");
  const auto paths = emit_sweep_tables(r.sweeps, dir);
  const std::string csv = slurp(paths.at(0));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
  for (const auto& x : r.records) CHECK(x.metric != "case_error");

  // One decay series per s; the divergence order recomputed from the emitted file.
  CHECK(emit_plot_data(r.series, "decay", dir).size() == 1);
  const auto conv = emit_plot_data(r.series, "convergence/divergence_identity", dir);
  REQUIRE(conv.size() == 1);
  std::ifstream in(conv[0]);
  std::string header;
  std::getline(in, header);
  Series s;
  double x, y;
  while (in >> x >> y) s.points.emplace_back(x, y);
  CHECK(s.points.size() == 2);
  bool found = false;
  for (const auto& rec : r.records)
    if (rec.case_name == "divergence_identity" && rec.metric == "fitted_order") {
      found = true;
      CHECK(std::abs(series_slope(s) - rec.value) <= 1e-6);
    }
  CHECK(found);
}

TEST_CASE("unknown suite and failing cases") {
  SuiteConfig c;
  c.suite = "nope";
  CHECK_THROWS_AS(run_suite(c), ConfigError);
  // A grid the flat cone cannot be sampled on becomes a failing record.
  SuiteConfig bad;
  bad.suite = "shrinker";
  bad.model = "flat";
  bad.grid.lo = 0.0;
  const SuiteReport r = run_suite(bad);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].metric == "case_error");
  CHECK_FALSE(r.all_pass());
}

TEST_CASE("every anchor is documented") {
  const std::string doc = slurp(std::string(G2LAB_SOURCE_DIR) + "/docs/anchors.md");
  REQUIRE_FALSE(doc.empty());
  SuiteConfig c = small_algebra();
  c.suite = "all";
  c.carleman.functions = {"centred"};
  c.carleman.alphas = {1};
  c.carleman.as = {0.05};
  c.carleman.decay_s = {0.1};
  c.carleman.divergence_nodes = {41, 81};
  c.diff_nodes = 17;
  const SuiteReport r = run_suite(c);
  std::set<std::string> anchors;
  for (const auto& x : r.records) anchors.insert(x.anchor);
  CHECK(anchors.size() >= 20);
  for (const auto& a : anchors) {
    CAPTURE(a);
    CHECK(doc.find("`" + a + "`") != std::string::npos);
  }
  for (const auto& m : metric_registry()) {
    CAPTURE(m.name);
    CHECK(doc.find("`" + m.name + "`") != std::string::npos);
  }
}

TEST_CASE("reference fixtures for phi0 and its dual") {
  const auto load = [](const std::string& name) {
    std::ifstream in(std::string(G2LAB_SOURCE_DIR) + "/tests/fixtures/" + name);
    std::string line;
    std::getline(in, line);  // header
    std::vector<std::pair<std::string, double>> rows;
    while (std::getline(in, line)) {
      const auto comma = line.find(',');
      rows.emplace_back(line.substr(0, comma), std::stod(line.substr(comma + 1)));
    }
    return rows;
  };
  auto check = [](const AltForm& f, const std::vector<std::pair<std::string, double>>& rows) {
    AltForm g(f.k);
    for (const auto& [idx, v] : rows) {
      REQUIRE(int(idx.size()) == f.k);
      if (f.k == 3) g.at({idx[0] - '0', idx[1] - '0', idx[2] - '0'}) = v;
      else g.at({idx[0] - '0', idx[1] - '0', idx[2] - '0', idx[3] - '0'}) = v;
    }
    for (std::size_t r = 0; r < f.c.size(); ++r) CHECK(g.c[r] == f.c[r]);
  };
  const ThreeForm p = standard_phi();
  const auto phi_rows = load("phi0.csv");
  const auto psi_rows = load("psi0.csv");
  CHECK(phi_rows.size() == 7);
  CHECK(psi_rows.size() == 7);
  check(p, phi_rows);
  check(hodge_star(Metric7::identity(), p), psi_rows);
}
