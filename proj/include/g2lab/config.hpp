#pragma once
// Sectioned key/value configuration for suite runs. The schema is fixed; any
// unknown section or key, duplicate key or malformed value is a ConfigError
// carrying the line and the dotted field name. See docs/config.md.
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "g2lab/carleman.hpp"

namespace g2lab {

struct ConfigError : std::runtime_error {
  ConfigError(int line, std::string field, const std::string& what);
  int line;  // 0 when the error is not tied to a line (command-line overrides)
  std::string field;
};

struct GridSpec {
  std::optional<double> lo, hi;
  std::optional<int> nodes;
};

struct CarlemanConfig {
  CarlemanVariant variant = CarlemanVariant::gaussian;
  std::vector<double> alphas{1, 2, 4, 8, 16, 32, 64};
  std::vector<double> as{0.01, 0.05, 0.1};
  std::vector<double> rhos{20.0};
  int n = 3;
  double gamma = 1.0 / 12.0, delta = 0.5, eta = 0.5;
  int denominator = 8;
  std::vector<std::string> functions{"centred", "inner", "quadratic", "oscillating", "narrow"};
  int r_nodes = 241;
  std::vector<double> decay_s{0.05, 0.1, 0.2};
  std::vector<int> divergence_nodes{161, 321, 641};
};

struct SuiteConfig {
  std::string suite = "all";
  std::uint64_t seed = 0;
  std::string model = "all";
  GridSpec grid;
  std::size_t samples = 10000;
  std::size_t contraction_samples = 1000;
  double epsilon = 0.05;
  int diff_nodes = 33;
  CarlemanConfig carleman;
  std::map<std::string, double> tolerances;
  std::string out, format = "json", plots;
  bool timings = false;
};

const std::vector<std::string>& suite_names();
const std::vector<std::string>& test_function_names();

SuiteConfig parse_config(const std::string& text);
SuiteConfig load_config(const std::string& path);

// Every numeric field, seed and output excluded, as sorted key=value lines.
std::string canonical_config(const SuiteConfig& c);
// FNV-1a 64 of canonical_config, 16 hex digits.
std::string config_hash(const SuiteConfig& c);

}  // namespace g2lab
