#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stemdiff/config.hpp"
#include "stemdiff/field_renderer.hpp"

namespace stemdiff {

// Renders the configured sequence to the configured sink and prints a
// one-line summary (frames, wall time, peak value and pixel) to `log`.
RenderSummary run_simulation(const SimConfig& config, std::ostream& log);

// One benchmark cell. e1_calls counts E1 evaluations implied by the
// rendered (pixel, event) pairs.
struct BenchmarkRecord {
  int n_probes = 0;
  double delta_t = 0.0;
  double delta_s = 0.0;
  int threads = 0;
  double wall_time = 0.0;
  std::uint64_t e1_calls = 0;
};

struct BenchmarkResult {
  std::vector<BenchmarkRecord> records;
  // Least-squares slope of log(wall_time) vs log(N) for each delta_t,
  // in the order the delta_ts were given.
  std::vector<double> slopes;
  double e1_ns_per_call = 0.0;  // measured on a micro-loop
};

inline constexpr const char* kBenchmarkCsvHeader =
    "n_probes,delta_t_s,delta_s_m,threads,wall_time_s,e1_calls";

// Runs raster scans for each (side, delta_t) cell with the base config's
// pitch, dwell and pixel side held fixed; the scanned area grows with the
// probe count and the simulation grid covers it with a one-pitch margin.
// Writes one CSV row per cell to `csv` and progress lines to `log`.
// Requires at least 4 distinct sides.
BenchmarkResult run_benchmark(const std::vector<int>& sides,
                              const std::vector<double>& delta_ts,
                              const SimConfig& base, std::ostream& csv,
                              std::ostream& log);

struct ValidationCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ValidationResult {
  std::vector<ValidationCheck> checks;
  bool pass = false;
};

// Runs the verification oracles against the configured parameters:
// PDE residual, mass conservation, and a brute-force frame comparison
// scaled down to the oracle limits. Prints one pass/fail line per check.
// corrupt_q0_sign is a test hook that flips the deposition sign inside
// the mass check; it must make that check fail.
ValidationResult validate_config(const SimConfig& config, std::ostream& log,
                                 bool corrupt_q0_sign = false);

// Least-squares slope of y vs x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace stemdiff
