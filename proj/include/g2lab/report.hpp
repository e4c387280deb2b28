#pragma once
// Report records, plot series and their serialization. Record schema and
// anchor keys are documented in docs/report.md and docs/anchors.md.
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "g2lab/carleman.hpp"

namespace g2lab {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptySelection : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// residual: |value| <= tolerance. reference: |value - expected| <= tolerance.
// upper_bound: value <= tolerance. lower_bound: value >= tolerance.
// info: always passes. Non-finite values fail every kind except info.
enum class Kind { residual, reference, upper_bound, lower_bound, info };
const char* kind_name(Kind k);
Kind kind_from_name(const std::string& s);

struct ReportRecord {
  std::string suite, case_name, anchor, metric;
  double value = 0.0;
  std::optional<double> expected;
  double tolerance = 0.0;
  Kind kind = Kind::residual;
  bool pass = false;
  double wall_time = 0.0;  // seconds; serialized only on request
};

bool evaluate_pass(const ReportRecord& r);

struct MetricInfo {
  std::string name;
  Kind kind;
  double tolerance;
};
const std::vector<MetricInfo>& metric_registry();
bool is_known_metric(const std::string& name);
const MetricInfo& metric_info(const std::string& name);

// Two-column plot series, grouped by family (decay, convergence, ratio_sweep, block_decay).
struct Series {
  std::string family, name;
  std::string x_label, y_label;
  std::vector<std::pair<double, double>> points;
};

// Least-squares slope of a series.
double series_slope(const Series& s);

struct SweepTable {
  std::string name;
  std::vector<SweepRow> rows;
};

struct SuiteReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<ReportRecord> records;
  std::vector<Series> series;
  std::vector<SweepTable> sweeps;
  bool all_pass() const;
  std::size_t failures() const;
};

void write_json(std::ostream& os, const SuiteReport& r, bool timings = false);
void write_csv(std::ostream& os, const SuiteReport& r, bool timings = false);
// format is "json" or "csv"; IoError if the file cannot be written.
void write_report(const SuiteReport& r, const std::string& path, const std::string& format, bool timings = false);
SuiteReport read_json_report(std::istream& is);
SuiteReport read_json_report(const std::string& path);

// Writes one file per matching series ("all" matches everything, otherwise the
// family or a family/name prefix) and returns the paths in series order.
// Throws EmptySelection when nothing matches.
std::vector<std::string> emit_plot_data(const std::vector<Series>& series, const std::string& selector,
                                        const std::string& dir);
// One CSV per sweep table, sweep_<name>.csv.
std::vector<std::string> emit_sweep_tables(const std::vector<SweepTable>& sweeps, const std::string& dir);

}  // namespace g2lab
