#pragma once
// Suite orchestration: each suite is a list of independent cases run in
// parallel; records are merged in (suite, case) order.
#include "g2lab/config.hpp"
#include "g2lab/report.hpp"

namespace g2lab {

// Test functions of the ratio sweep, by config name.
TestFunction named_test_function(const std::string& name);

// Suite failures become failing records; ConfigError for an invalid config.
SuiteReport run_suite(const SuiteConfig& config);

}  // namespace g2lab
