#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "stemdiff/diffusion_kernel.hpp"
#include "stemdiff/scan_patterns.hpp"

namespace stemdiff {

// Pixel lattice of the rendered field. Pixel (u, v) — column u, row v —
// is centered at origin + ((u + 1/2), (v + 1/2)) * pixel_side.
struct SimulationGrid {
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  double pixel_side = 5e-10;
  int width = 1;
  int height = 1;

  Eigen::Vector2d pixel_center(int u, int v) const {
    return origin + Eigen::Vector2d((u + 0.5) * pixel_side,
                                    (v + 0.5) * pixel_side);
  }
  std::int64_t pixel_count() const {
    return static_cast<std::int64_t>(width) * height;
  }
  void validate() const;
};

// Frame f is rendered at start + f * frame_interval.
struct FrameSchedule {
  double frame_interval = 1e-5;
  double start = 0.0;
  double end = 0.0;

  int frame_count() const;
  void validate() const;
};

// Cumulative concentration over the grid at one timestamp.
// values(v, u) is row v, column u, in u/m^2.
struct FieldFrame {
  double timestamp = 0.0;
  Eigen::ArrayXXd values;
  int events_active = 0;
};

// Argmax pixel as (linear row-major index, value); ties go to the lowest
// linear index. Throws on an empty frame.
std::pair<std::int64_t, double> max_field(const FieldFrame& frame);

// Cumulative field at time t: the sum of phi over every event with
// start <= t. Parallel over pixel rows; each pixel is accumulated by
// exactly one worker in fixed event order, so the result is bitwise
// identical for any thread count. threads = 0 picks the hardware count
// (overridable via STEMDIFF_THREADS).
FieldFrame render_frame(const SimulationGrid& grid, const ScanPlan& plan,
                        const PhysicalParams& params, double t,
                        int threads = 0);

// Consumes frames in timestamp order from a single coordinator thread.
class FrameSink {
 public:
  virtual ~FrameSink() = default;
  virtual void consume(const FieldFrame& frame) = 0;
  // Called once after the last frame.
  virtual void finalize() {}
};

struct RenderSummary {
  int frames = 0;
  double wall_seconds = 0.0;
  std::uint64_t e1_calls = 0;  // off-probe (pixel, event) pairs x 2
  double peak_value = 0.0;
  std::int64_t peak_pixel = 0;
  double peak_time = 0.0;
};

RenderSummary render_sequence(const SimulationGrid& grid, const ScanPlan& plan,
                              const PhysicalParams& params,
                              const FrameSchedule& schedule, FrameSink& sink,
                              int threads = 0);

// Resolve a thread-count hint: positive hints win, then STEMDIFF_THREADS,
// then std::thread::hardware_concurrency().
int resolve_threads(int hint);

// --- frame sinks -----------------------------------------------------------

// Discards frames; used by benchmarks.
class NullSink : public FrameSink {
 public:
  void consume(const FieldFrame&) override {}
};

// One file per frame: a text header (magic, width, height, timestamp,
// units) followed by row-major little-endian float32 values.
class RawF32Sink : public FrameSink {
 public:
  RawF32Sink(std::filesystem::path directory, std::string stem);
  void consume(const FieldFrame& frame) override;

 private:
  std::filesystem::path dir_;
  std::string stem_;
  int index_ = 0;
};

// One 16-bit PGM per frame, normalized by the sequence-wide maximum.
// Frames are buffered and written on finalize(); the normalization
// constant goes to "<stem>_normalization.txt".
class Pgm16Sink : public FrameSink {
 public:
  Pgm16Sink(std::filesystem::path directory, std::string stem);
  void consume(const FieldFrame& frame) override;
  void finalize() override;

 private:
  std::filesystem::path dir_;
  std::string stem_;
  std::vector<FieldFrame> frames_;
};

// One CSV per frame with header "row,col,value".
class CsvSink : public FrameSink {
 public:
  CsvSink(std::filesystem::path directory, std::string stem);
  void consume(const FieldFrame& frame) override;

 private:
  std::filesystem::path dir_;
  std::string stem_;
  int index_ = 0;
};

// Factory for the CLI formats: rawf32 | pgm16 | csv.
std::unique_ptr<FrameSink> make_sink(const std::string& format,
                                     const std::filesystem::path& directory,
                                     const std::string& stem);

}  // namespace stemdiff
