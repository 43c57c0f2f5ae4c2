#include "stemdiff/field_renderer.hpp"

#include <algorithm>
#include <barrier>
#include <chrono>
#include <functional>
#include <memory>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "stemdiff/special_functions.hpp"

namespace stemdiff {

void SimulationGrid::validate() const {
  if (!(pixel_side > 0.0) || !std::isfinite(pixel_side))
    throw std::invalid_argument("SimulationGrid: pixel_side must be positive");
  if (width < 1 || height < 1)
    throw std::invalid_argument("SimulationGrid: width and height must be >= 1");
  if (!origin.allFinite())
    throw std::invalid_argument("SimulationGrid: origin must be finite");
}

int FrameSchedule::frame_count() const {
  return static_cast<int>(std::floor((end - start) / frame_interval)) + 1;
}

void FrameSchedule::validate() const {
  if (!(frame_interval > 0.0) || !std::isfinite(frame_interval))
    throw std::invalid_argument("FrameSchedule: frame_interval must be > 0");
  if (!(end >= start))
    throw std::invalid_argument("FrameSchedule: end must be >= start");
  if (!(start >= 0.0))
    throw std::invalid_argument("FrameSchedule: start must be >= 0");
}

std::pair<std::int64_t, double> max_field(const FieldFrame& frame) {
  if (frame.values.size() == 0)
    throw std::invalid_argument("max_field: empty frame");
  std::int64_t best = 0;
  double best_value = frame.values(0, 0);
  for (int v = 0; v < frame.values.rows(); ++v) {
    for (int u = 0; u < frame.values.cols(); ++u) {
      const double x = frame.values(v, u);
      if (x > best_value) {
        best_value = x;
        best = static_cast<std::int64_t>(v) * frame.values.cols() + u;
      }
    }
  }
  return {best, best_value};
}

int resolve_threads(int hint) {
  if (hint > 0) return hint;
  if (const char* env = std::getenv("STEMDIFF_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

struct RowRange {
  int begin;
  int end;
};

// Contiguous near-equal row blocks, one per worker. The block boundaries
// never affect results: each pixel is owned by exactly one worker and
// summed in fixed event order.
std::vector<RowRange> partition_rows(int height, int workers) {
  std::vector<RowRange> ranges;
  const int base = height / workers;
  const int extra = height % workers;
  int row = 0;
  for (int w = 0; w < workers; ++w) {
    const int rows = base + (w < extra ? 1 : 0);
    ranges.push_back({row, row + rows});
    row += rows;
  }
  return ranges;
}

// Persistent worker team; frames reuse the same threads so per-frame cost
// stays proportional to the pixel work.
class RowPool {
 public:
  explicit RowPool(int workers) : barrier_(workers + 1) {
    threads_.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      threads_.emplace_back([this, w] {
        while (true) {
          barrier_.arrive_and_wait();
          if (stop_) return;
          job_(w);
          barrier_.arrive_and_wait();
        }
      });
    }
  }

  RowPool(const RowPool&) = delete;
  RowPool& operator=(const RowPool&) = delete;

  void run(const std::function<void(int)>& job) {
    job_ = job;
    barrier_.arrive_and_wait();  // release the workers
    barrier_.arrive_and_wait();  // wait for them to finish
  }

  ~RowPool() {
    stop_ = true;
    barrier_.arrive_and_wait();
    for (auto& t : threads_) t.join();
  }

 private:
  std::barrier<> barrier_;
  std::function<void(int)> job_;
  bool stop_ = false;
  std::vector<std::thread> threads_;
};

// Per-event constants hoisted out of the pixel loop. The denominators are
// the exact expressions phi_on/phi_off evaluate, so the fused loop below
// reproduces phi() bitwise for off-probe pixels.
struct EventTerms {
  double x, y;
  double denom_now;   // 2 d_s + 4 D (t - start)
  double denom_base;  // 2 d_s on-branch, 2 d_s + 4 D (t - end) off-branch
  double at_probe;    // coincident-pixel value, prefactor included
};

std::vector<EventTerms> prepare_events(const std::vector<ProbeEvent>& events,
                                       std::size_t active,
                                       const PhysicalParams& params, double t) {
  std::vector<EventTerms> terms;
  terms.reserve(active);
  const double two_ds = 2.0 * params.d_s();
  for (std::size_t i = 0; i < active; ++i) {
    const ProbeEvent& e = events[i];
    const double delta = t - e.start;
    EventTerms et;
    et.x = e.position.x();
    et.y = e.position.y();
    et.denom_now = two_ds + 4.0 * params.d * delta;
    et.denom_base = delta <= e.dwell
                        ? two_ds
                        : two_ds + 4.0 * params.d * (delta - e.dwell);
    et.at_probe = phi_at_probe(t, e, params);
    terms.push_back(et);
  }
  return terms;
}

// Fills rows [row_begin, row_end) of `out`, summing events in index order.
// Returns the number of off-probe (pixel, event) pairs evaluated.
std::uint64_t render_rows(const SimulationGrid& grid,
                          const std::vector<EventTerms>& terms,
                          const PhysicalParams& params, int row_begin,
                          int row_end, Eigen::ArrayXXd& out) {
  const double thresh = kCoincidenceFraction * params.r_s;
  const double thresh2 = thresh * thresh;
  const double pref = params.q0 / (4.0 * std::numbers::pi * params.d);
  std::uint64_t off_probe_pairs = 0;
  for (int v = row_begin; v < row_end; ++v) {
    for (int u = 0; u < grid.width; ++u) {
      const Eigen::Vector2d r = grid.pixel_center(u, v);
      double sum = 0.0;
      for (const EventTerms& e : terms) {
        const double dx = r.x() - e.x;
        const double dy = r.y() - e.y;
        const double rho2 = dx * dx + dy * dy;
        if (rho2 <= thresh2) {
          sum += e.at_probe;
          continue;
        }
        ++off_probe_pairs;
        sum += pref * e1_diff(rho2 / e.denom_now, rho2 / e.denom_base);
      }
      out(v, u) = sum;
    }
  }
  return off_probe_pairs;
}

// Renders one frame using an already-running pool (or single-threaded when
// pool is null). Returns the off-probe (pixel, event) pair count.
std::uint64_t render_frame_into(const SimulationGrid& grid,
                                const ScanPlan& plan,
                                const PhysicalParams& params, double t,
                                RowPool* pool,
                                const std::vector<RowRange>& ranges,
                                FieldFrame& frame) {
  const auto& events = plan.events;
  // events are time-sorted, so active events form a prefix
  std::size_t active = 0;
  while (active < events.size() && events[active].start <= t) ++active;

  frame.timestamp = t;
  frame.events_active = static_cast<int>(active);
  frame.values.resize(grid.height, grid.width);

  const std::vector<EventTerms> terms =
      prepare_events(events, active, params, t);
  if (pool == nullptr) {
    return render_rows(grid, terms, params, 0, grid.height, frame.values);
  }
  std::vector<std::uint64_t> counts(ranges.size(), 0);
  pool->run([&](int w) {
    counts[w] = render_rows(grid, terms, params, ranges[w].begin,
                            ranges[w].end, frame.values);
  });
  std::uint64_t total = 0;
  for (std::uint64_t c : counts) total += c;
  return total;
}

}  // namespace

FieldFrame render_frame(const SimulationGrid& grid, const ScanPlan& plan,
                        const PhysicalParams& params, double t, int threads) {
  grid.validate();
  params.validate();
  FieldFrame frame;
  const int n_threads = std::min(resolve_threads(threads), grid.height);
  if (n_threads <= 1) {
    render_frame_into(grid, plan, params, t, nullptr, {}, frame);
  } else {
    RowPool pool(n_threads);
    render_frame_into(grid, plan, params, t, &pool,
                      partition_rows(grid.height, n_threads), frame);
  }
  return frame;
}

RenderSummary render_sequence(const SimulationGrid& grid, const ScanPlan& plan,
                              const PhysicalParams& params,
                              const FrameSchedule& schedule, FrameSink& sink,
                              int threads) {
  grid.validate();
  params.validate();
  schedule.validate();
  const auto t0 = std::chrono::steady_clock::now();
  RenderSummary summary;
  const int n_frames = schedule.frame_count();
  const int n_threads = std::min(resolve_threads(threads), grid.height);
  std::unique_ptr<RowPool> pool;
  std::vector<RowRange> ranges;
  if (n_threads > 1) {
    pool = std::make_unique<RowPool>(n_threads);
    ranges = partition_rows(grid.height, n_threads);
  }
  FieldFrame frame;
  for (int f = 0; f < n_frames; ++f) {
    const double t = schedule.start + f * schedule.frame_interval;
    summary.e1_calls +=
        2 * render_frame_into(grid, plan, params, t, pool.get(), ranges, frame);
    if (frame.values.size() > 0) {
      const auto [idx, value] = max_field(frame);
      if (value > summary.peak_value) {
        summary.peak_value = value;
        summary.peak_pixel = idx;
        summary.peak_time = t;
      }
    }
    sink.consume(frame);
    ++summary.frames;
  }
  sink.finalize();
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return summary;
}

// --- sinks ------------------------------------------------------------------

namespace {

std::string frame_name(const std::string& stem, int index,
                       const std::string& ext) {
  std::ostringstream name;
  name << stem << '_';
  name.width(6);
  name.fill('0');
  name << index << ext;
  return name.str();
}

std::ofstream open_output(const std::filesystem::path& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  return out;
}

}  // namespace

RawF32Sink::RawF32Sink(std::filesystem::path directory, std::string stem)
    : dir_(std::move(directory)), stem_(std::move(stem)) {
  std::filesystem::create_directories(dir_);
}

void RawF32Sink::consume(const FieldFrame& frame) {
  auto out = open_output(dir_ / frame_name(stem_, index_++, ".f32"), true);
  out.precision(17);
  out << "STEMDIFF-F32 1\n"
      << "width " << frame.values.cols() << '\n'
      << "height " << frame.values.rows() << '\n'
      << "timestamp_s " << frame.timestamp << '\n'
      << "units u/m^2\n";
  for (int v = 0; v < frame.values.rows(); ++v) {
    for (int u = 0; u < frame.values.cols(); ++u) {
      const float x = static_cast<float>(frame.values(v, u));
      out.write(reinterpret_cast<const char*>(&x), sizeof(x));
    }
  }
  if (!out) throw std::runtime_error("write failure in RawF32Sink");
}

Pgm16Sink::Pgm16Sink(std::filesystem::path directory, std::string stem)
    : dir_(std::move(directory)), stem_(std::move(stem)) {
  std::filesystem::create_directories(dir_);
}

void Pgm16Sink::consume(const FieldFrame& frame) { frames_.push_back(frame); }

void Pgm16Sink::finalize() {
  double max_value = 0.0;
  for (const FieldFrame& f : frames_)
    max_value = std::max(max_value, f.values.maxCoeff());
  const double scale = max_value > 0.0 ? 65535.0 / max_value : 0.0;
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    const FieldFrame& f = frames_[i];
    auto out = open_output(
        dir_ / frame_name(stem_, static_cast<int>(i), ".pgm"), true);
    out << "P5\n" << f.values.cols() << ' ' << f.values.rows() << "\n65535\n";
    for (int v = 0; v < f.values.rows(); ++v) {
      for (int u = 0; u < f.values.cols(); ++u) {
        const auto g = static_cast<std::uint16_t>(
            std::lround(std::clamp(f.values(v, u) * scale, 0.0, 65535.0)));
        const unsigned char bytes[2] = {
            static_cast<unsigned char>(g >> 8),
            static_cast<unsigned char>(g & 0xff)};  // big-endian per PGM
        out.write(reinterpret_cast<const char*>(bytes), 2);
      }
    }
    if (!out) throw std::runtime_error("write failure in Pgm16Sink");
  }
  auto side = open_output(dir_ / (stem_ + "_normalization.txt"), false);
  side.precision(17);
  side << "max_value_u_per_m2 " << max_value << '\n'
       << "gray_level_scale " << scale << '\n'
       << "frames " << frames_.size() << '\n';
  frames_.clear();
}

CsvSink::CsvSink(std::filesystem::path directory, std::string stem)
    : dir_(std::move(directory)), stem_(std::move(stem)) {
  std::filesystem::create_directories(dir_);
}

void CsvSink::consume(const FieldFrame& frame) {
  auto out = open_output(dir_ / frame_name(stem_, index_++, ".csv"), false);
  out.precision(17);
  out << "row,col,value\n";
  for (int v = 0; v < frame.values.rows(); ++v) {
    for (int u = 0; u < frame.values.cols(); ++u) {
      out << v << ',' << u << ',' << frame.values(v, u) << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failure in CsvSink");
}

std::unique_ptr<FrameSink> make_sink(const std::string& format,
                                     const std::filesystem::path& directory,
                                     const std::string& stem) {
  if (format == "rawf32") return std::make_unique<RawF32Sink>(directory, stem);
  if (format == "pgm16") return std::make_unique<Pgm16Sink>(directory, stem);
  if (format == "csv") return std::make_unique<CsvSink>(directory, stem);
  throw std::invalid_argument("unknown frame format: " + format);
}

}  // namespace stemdiff
