#include "g2lab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "g2lab/report.hpp"

namespace g2lab {

ConfigError::ConfigError(int line, std::string field, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ", " + field + ": " + what : field + ": " + what),
      line(line),
      field(std::move(field)) {}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> s{"algebra", "geometry", "flow", "shrinker", "diffsystem", "carleman", "all"};
  return s;
}

const std::vector<std::string>& test_function_names() {
  static const std::vector<std::string> s{"centred", "inner", "quadratic", "oscillating", "narrow"};
  return s;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

struct Ctx {
  int line;
  std::string field;
  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(line, field, what); }
};

double as_double(const Ctx& c, const std::string& v) {
  double x = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(x))
    c.fail("expected a number, got '" + v + "'");
  return x;
}

long long as_int(const Ctx& c, const std::string& v, long long lo, long long hi) {
  long long x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size()) c.fail("expected an integer, got '" + v + "'");
  if (x < lo || x > hi) c.fail("value " + v + " out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return x;
}

std::uint64_t as_uint64(const Ctx& c, const std::string& v) {
  std::uint64_t x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size())
    c.fail("expected a non-negative integer, got '" + v + "'");
  return x;
}

std::string as_choice(const Ctx& c, const std::string& v, const std::vector<std::string>& allowed) {
  if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : "|") + a;
    c.fail("expected one of " + list + ", got '" + v + "'");
  }
  return v;
}

std::vector<double> as_doubles(const Ctx& c, const std::string& v, double lo, double hi, bool open_lo) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) {
    const double x = as_double(c, item);
    if (x > hi || x < lo || (open_lo && x == lo)) c.fail("value " + item + " out of range");
    out.push_back(x);
  }
  if (out.empty()) c.fail("empty list");
  return out;
}

bool as_bool(const Ctx& c, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  c.fail("expected true or false, got '" + v + "'");
}

using Setter = std::function<void(const Ctx&, const std::string&, SuiteConfig&)>;

const std::map<std::string, Setter>& schema() {
  static const std::map<std::string, Setter> s = [] {
    std::map<std::string, Setter> m;
    m["run.suite"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) { k.suite = as_choice(c, v, suite_names()); };
    m["run.seed"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) { k.seed = as_uint64(c, v); };
    m["model.name"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) {
      k.model = as_choice(c, v, {"fowdar", "flat", "synthetic", "all"});
    };
    m["grid.lo"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) { k.grid.lo = as_double(c, v); };
    m["grid.hi"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) { k.grid.hi = as_double(c, v); };
    m["grid.nodes"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) { k.grid.nodes = int(as_int(c, v, 9, 100000)); };
    m["algebra.samples"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) {
      k.samples = std::size_t(as_int(c, v, 1, 100000000));
    };
    m["algebra.contraction_samples"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) {
      k.contraction_samples = std::size_t(as_int(c, v, 1, 100000000));
    };
    m["algebra.epsilon"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) {
      k.epsilon = as_doubles(c, v, 0.0, 0.5, true).at(0);
      if (split_list(v).size() != 1) c.fail("expected a single number");
    };
    m["diffsystem.nodes"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) { k.diff_nodes = int(as_int(c, v, 17, 257)); };
    m["carleman.variant"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) {
      const std::vector<std::string> names{"gaussian", "gaussian_log", "H1_pde", "H1_ode", "ode_sup"};
      const auto it = std::find(names.begin(), names.end(), as_choice(c, v, names));
      k.carleman.variant = CarlemanVariant(it - names.begin());
    };
    m["carleman.alphas"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) { k.carleman.alphas = as_doubles(c, v, 1.0, 1e6, false); };
    m["carleman.a"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) {
      k.carleman.as = as_doubles(c, v, 0.0, 1.0, true);
      for (double a : k.carleman.as)
        if (a >= 1.0) c.fail("a must lie in (0, 1)");
    };
    m["carleman.rho"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) { k.carleman.rhos = as_doubles(c, v, 0.0, 1e6, true); };
    m["carleman.n"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) { k.carleman.n = int(as_int(c, v, 1, 16)); };
    m["carleman.gamma"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) {
      k.carleman.gamma = as_double(c, v);
      if (!(k.carleman.gamma > 0.0)) c.fail("gamma must be positive");
    };
    m["carleman.delta"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) {
      k.carleman.delta = as_double(c, v);
      if (!(k.carleman.delta > 0.0 && k.carleman.delta < 1.0)) c.fail("delta must lie in (0, 1)");
    };
    m["carleman.eta"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) {
      k.carleman.eta = as_double(c, v);
      if (!(k.carleman.eta > 0.0 && k.carleman.eta < 1.0)) c.fail("eta must lie in (0, 1)");
    };
    m["carleman.denominator"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) {
      k.carleman.denominator = int(as_int(c, v, 4, 8));
      if (k.carleman.denominator != 4 && k.carleman.denominator != 8) c.fail("denominator must be 4 or 8");
    };
    m["carleman.functions"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) {
      k.carleman.functions.clear();
      for (const auto& f : split_list(v)) k.carleman.functions.push_back(as_choice(c, f, test_function_names()));
      if (k.carleman.functions.empty()) c.fail("empty list");
    };
    m["carleman.r_nodes"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) { k.carleman.r_nodes = int(as_int(c, v, 9, 100001)); };
    m["carleman.decay_s"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) {
      k.carleman.decay_s = as_doubles(c, v, 0.0, 1.0, true);
      for (double s : k.carleman.decay_s)
        if (s >= 1.0) c.fail("s must lie in (0, 1)");
    };
    m["carleman.divergence_nodes"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) {
      k.carleman.divergence_nodes.clear();
      for (const auto& item : split_list(v)) {
        const int n = int(as_int(c, item, 9, 4097));
        if (n % 2 == 0) c.fail("node counts must be odd");
        k.carleman.divergence_nodes.push_back(n);
      }
      if (k.carleman.divergence_nodes.size() < 2) c.fail("need at least two grids");
    };
    m["output.path"] = [](const Ctx&, const std::string& v, SuiteConfig& k) { k.out = v; };
    m["output.format"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) { k.format = as_choice(c, v, {"json", "csv"}); };
    m["output.plots"] = [](const Ctx&, const std::string& v, SuiteConfig& k) { k.plots = v; };
    m["output.timings"] = [](const Ctx& c, const std::string& v, SuiteConfig& k) { k.timings = as_bool(c, v); };
    return m;
  }();
  return s;
}

}  // namespace

SuiteConfig parse_config(const std::string& text) {
  SuiteConfig cfg;
  std::set<std::string> sections;
  for (const auto& [key, _] : schema()) sections.insert(key.substr(0, key.find('.')));
  sections.insert("tolerance");
  std::set<std::string> seen;
  std::string section;
  std::istringstream is(text);
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(line, s, "malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      if (!sections.count(section)) throw ConfigError(line, "[" + section + "]", "unknown section");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line, s, "expected key = value");
    const std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
    if (section.empty()) throw ConfigError(line, key, "key outside a section");
    const std::string field = section + "." + key;
    const Ctx ctx{line, field};
    if (key.empty()) ctx.fail("empty key");
    if (!seen.insert(field).second) ctx.fail("duplicate key");
    if (section == "tolerance") {
      if (!is_known_metric(key)) ctx.fail("unknown metric");
      cfg.tolerances[key] = as_double(ctx, value);
      continue;
    }
    const auto it = schema().find(field);
    if (it == schema().end()) ctx.fail("unknown key");
    if (value.empty()) ctx.fail("empty value");
    it->second(ctx, value, cfg);
  }
  if (cfg.grid.lo && cfg.grid.hi && !(*cfg.grid.lo < *cfg.grid.hi)) throw ConfigError(0, "grid", "lo must be below hi");
  return cfg;
}

SuiteConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, path, "cannot read config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F f) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ",") + f(x);
  return s;
}

}  // namespace

std::string canonical_config(const SuiteConfig& c) {
  std::map<std::string, std::string> kv;
  kv["run.suite"] = c.suite;
  kv["model.name"] = c.model;
  kv["grid.lo"] = c.grid.lo ? num(*c.grid.lo) : "default";
  kv["grid.hi"] = c.grid.hi ? num(*c.grid.hi) : "default";
  kv["grid.nodes"] = c.grid.nodes ? std::to_string(*c.grid.nodes) : "default";
  kv["algebra.samples"] = std::to_string(c.samples);
  kv["algebra.contraction_samples"] = std::to_string(c.contraction_samples);
  kv["algebra.epsilon"] = num(c.epsilon);
  kv["diffsystem.nodes"] = std::to_string(c.diff_nodes);
  const auto& k = c.carleman;
  kv["carleman.variant"] = variant_name(k.variant);
  kv["carleman.alphas"] = join(k.alphas, num);
  kv["carleman.a"] = join(k.as, num);
  kv["carleman.rho"] = join(k.rhos, num);
  kv["carleman.n"] = std::to_string(k.n);
  kv["carleman.gamma"] = num(k.gamma);
  kv["carleman.delta"] = num(k.delta);
  kv["carleman.eta"] = num(k.eta);
  kv["carleman.denominator"] = std::to_string(k.denominator);
  kv["carleman.functions"] = join(k.functions, [](const std::string& s) { return s; });
  kv["carleman.r_nodes"] = std::to_string(k.r_nodes);
  kv["carleman.decay_s"] = join(k.decay_s, num);
  kv["carleman.divergence_nodes"] = join(k.divergence_nodes, [](int n) { return std::to_string(n); });
  for (const auto& [m, t] : c.tolerances) kv["tolerance." + m] = num(t);
  std::string out;
  for (const auto& [key, v] : kv) out += key + "=" + v + "\n";
  return out;
}

std::string config_hash(const SuiteConfig& c) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical_config(c)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace g2lab
