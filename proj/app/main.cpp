// g2lab <suite> [--config PATH] [--seed N] [--out PATH] [--format json|csv] [--plots DIR]
//
// Exit status: 0 when every record passes, 1 when any record fails, 2 for
// usage, configuration or I/O errors.
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "g2lab/suites.hpp"

int main(int argc, char** argv) {
  using namespace g2lab;
  CLI::App app{"Numerical checks for closed G2 Laplacian solitons and their flows", "g2lab"};
  std::string suite, config_path, out, format, plots;
  std::optional<std::uint64_t> seed;
  app.add_option("suite", suite, "algebra, geometry, flow, shrinker, diffsystem, carleman or all")
      ->required()
      ->check(CLI::IsMember(suite_names()));
  app.add_option("--config", config_path, "sectioned key/value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "seed for the random samplers");
  app.add_option("--out", out, "report path (default: stdout)");
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--plots", plots, "directory for plot data and sweep tables");
  app.add_flag("--timings", "include wall times in the report");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    SuiteConfig cfg = config_path.empty() ? SuiteConfig{} : load_config(config_path);
    cfg.suite = suite;
    if (seed) cfg.seed = *seed;
    if (!out.empty()) cfg.out = out;
    if (!format.empty()) cfg.format = format;
    if (!plots.empty()) cfg.plots = plots;
    if (app.count("--timings")) cfg.timings = true;

    const SuiteReport rep = run_suite(cfg);
    if (cfg.out.empty()) {
      if (cfg.format == "json")
        write_json(std::cout, rep, cfg.timings);
      else
        write_csv(std::cout, rep, cfg.timings);
    } else {
      write_report(rep, cfg.out, cfg.format, cfg.timings);
    }
    if (!cfg.plots.empty()) {
      if (!rep.series.empty()) emit_plot_data(rep.series, "all", cfg.plots);
      emit_sweep_tables(rep.sweeps, cfg.plots);
    }
    std::fprintf(stderr, "%s: %zu records, %zu failing\n", rep.suite.c_str(), rep.records.size(), rep.failures());
    return rep.all_pass() ? 0 : 1;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
  }
  return 2;
}
