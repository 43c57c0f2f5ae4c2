#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "stemdiff/diffusion_kernel.hpp"
#include "stemdiff/field_renderer.hpp"
#include "stemdiff/scan_patterns.hpp"

namespace stemdiff {

// Everything a simulation run needs, parsed from a JSON file. Unknown
// keys are rejected; keys starting with '_' are treated as comments.
struct SimConfig {
  PhysicalParams physical;
  ProbeGrid probe_grid;
  PatternDescriptor pattern;
  double dwell = 1e-5;
  double dead_time = 0.0;
  SimulationGrid sim_grid;
  FrameSchedule schedule;
  std::string output_format = "rawf32";
  std::filesystem::path output_directory = "frames";
  std::string output_stem = "frame";
  int threads = 0;  // 0 = auto

  // Builds the ScanPlan described by pattern/dwell/dead_time.
  ScanPlan make_plan() const;
  void validate() const;
};

// Default configuration: 20x20 probes at 2 nm pitch, delta_s = pitch/4,
// delta_t = dwell = 10 us, simulation grid covering the scanned area with
// a one-pitch margin, schedule covering the full scan.
SimConfig default_config();

SimConfig parse_config(const std::string& json_text);
SimConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const SimConfig& config);

// The default config serialized with explanatory "_comment" keys.
std::string commented_default_config();

}  // namespace stemdiff
