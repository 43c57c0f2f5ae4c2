#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stemdiff/config.hpp"
#include "stemdiff/orchestration.hpp"

namespace {

stemdiff::SimConfig load_with_overrides(const std::string& config_path,
                                        const std::string& output_dir,
                                        const std::string& format, int threads,
                                        long long seed) {
  stemdiff::SimConfig config = config_path.empty()
                                   ? stemdiff::default_config()
                                   : stemdiff::load_config(config_path);
  if (!output_dir.empty()) config.output_directory = output_dir;
  if (!format.empty()) config.output_format = format;
  if (threads >= 0) config.threads = threads;
  if (seed >= 0) config.pattern.seed = static_cast<std::uint64_t>(seed);
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"STEM damage-diffusion field simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::string format;
  int threads = -1;
  long long seed = -1;

  auto add_common = [&](CLI::App* cmd, bool with_output) {
    cmd->add_option("--config", config_path, "JSON configuration file");
    cmd->add_option("--threads", threads, "worker thread count (0 = auto)");
    cmd->add_option("--seed", seed, "override the scan-pattern seed");
    if (with_output) {
      cmd->add_option("--output-dir", output_dir, "frame output directory");
      cmd->add_option("--format", format, "frame format: rawf32 | pgm16 | csv")
          ->check(CLI::IsMember({"rawf32", "pgm16", "csv"}));
    }
  };

  auto* simulate = app.add_subcommand("simulate", "render the configured scan");
  add_common(simulate, true);

  auto* validate =
      app.add_subcommand("validate", "run the numerical verification checks");
  add_common(validate, false);

  auto* bench = app.add_subcommand(
      "benchmark", "measure runtime scaling over probe counts");
  std::vector<int> sides{4, 8, 12, 16, 20};
  std::vector<double> delta_ts{1e-5, 2e-5};
  std::string csv_path = "benchmark.csv";
  add_common(bench, false);
  bench->add_option("--sides", sides, "probe positions per side, per cell");
  bench->add_option("--delta-ts", delta_ts, "frame times in seconds");
  bench->add_option("--csv", csv_path, "output CSV path");

  auto* make_config = app.add_subcommand(
      "make-config", "emit a commented default configuration");
  std::string config_out;
  make_config->add_option("--output", config_out,
                          "write the config here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      const auto config =
          load_with_overrides(config_path, output_dir, format, threads, seed);
      stemdiff::run_simulation(config, std::cout);
      return 0;
    }
    if (*validate) {
      const auto config =
          load_with_overrides(config_path, "", "", threads, seed);
      const auto result = stemdiff::validate_config(config, std::cout);
      return result.pass ? 0 : 1;
    }
    if (*bench) {
      const auto config =
          load_with_overrides(config_path, "", "", threads, seed);
      std::ofstream csv(csv_path);
      if (!csv) throw std::runtime_error("cannot open " + csv_path);
      stemdiff::run_benchmark(sides, delta_ts, config, csv, std::cout);
      return 0;
    }
    if (*make_config) {
      const std::string text = stemdiff::commented_default_config();
      if (config_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(config_out);
        if (!out) throw std::runtime_error("cannot open " + config_out);
        out << text;
      }
      return 0;
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }
  return 0;
}
