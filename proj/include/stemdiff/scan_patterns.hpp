#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stemdiff/diffusion_kernel.hpp"

namespace stemdiff {

// Rectangular lattice of probe positions. Linear (row-major) index
// i = row * cols + col; site (row, col) sits at origin + (col, row) * pitch.
struct ProbeGrid {
  int rows = 1;
  int cols = 1;
  double pitch = 2e-9;
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();

  int size() const { return rows * cols; }
  Eigen::Vector2d site(int linear_index) const;
  void validate() const;
};

enum class PatternKind { raster, interleaved, random, subsampled };

std::string to_string(PatternKind kind);
PatternKind pattern_kind_from_string(const std::string& name);

struct PatternDescriptor {
  PatternKind kind = PatternKind::raster;
  int factor = 1;       // interleaved stride
  double ratio = 1.0;   // subsampled fraction
  std::uint64_t seed = 0;
};

// Time-ordered, non-overlapping probe events. Event k starts at
// k * (dwell + dead_time); every position lies on the generating lattice.
struct ScanPlan {
  std::vector<ProbeEvent> events;
  PatternDescriptor pattern;
  double dwell = 0.0;
  double dead_time = 0.0;

  // End time of the last event, 0 for an empty plan.
  double duration() const;
};

ScanPlan raster(const ProbeGrid& grid, double dwell, double dead_time);

// Pass p of `factor` visits linear indices congruent to p, in increasing
// order; concatenated passes cover the lattice exactly once.
ScanPlan interleaved(const ProbeGrid& grid, int factor, double dwell,
                     double dead_time);

// Uniformly random permutation of all sites. The generator is mt19937_64
// seeded with `seed`, shuffled by Fisher-Yates with rejection-sampled
// bounded draws, so plans are identical across platforms.
ScanPlan random_scan(const ProbeGrid& grid, std::uint64_t seed, double dwell,
                     double dead_time);

// ceil(ratio * N) distinct sites chosen uniformly (same generator as
// random_scan), visited in row-major order of the selected subset.
ScanPlan subsampled(const ProbeGrid& grid, double ratio, std::uint64_t seed,
                    double dwell, double dead_time);

// One event per line: index x_m y_m start_s dwell_s
void write_plan(std::ostream& out, const ScanPlan& plan);

}  // namespace stemdiff
