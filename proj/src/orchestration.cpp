#include "stemdiff/orchestration.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "stemdiff/special_functions.hpp"
#include "stemdiff/verification.hpp"

namespace stemdiff {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_slope: need >= 2 matching points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

RenderSummary run_simulation(const SimConfig& config, std::ostream& log) {
  config.validate();
  const ScanPlan plan = config.make_plan();
  auto sink = make_sink(config.output_format, config.output_directory,
                        config.output_stem);
  const RenderSummary summary =
      render_sequence(config.sim_grid, plan, config.physical, config.schedule,
                      *sink, config.threads);
  const std::int64_t row = summary.peak_pixel / config.sim_grid.width;
  const std::int64_t col = summary.peak_pixel % config.sim_grid.width;
  log.precision(6);
  log << "frames=" << summary.frames << " wall_s=" << summary.wall_seconds
      << " peak=" << summary.peak_value << " peak_pixel=(" << row << ","
      << col << ")" << " peak_time_s=" << summary.peak_time << '\n';
  return summary;
}

namespace {

// Benchmark cell config: n x n probes at the base pitch, simulation grid
// covering the scanned extent plus a one-pitch margin at the base delta_s.
SimConfig benchmark_cell(const SimConfig& base, int side, double delta_t) {
  SimConfig c = base;
  c.probe_grid.rows = side;
  c.probe_grid.cols = side;
  const double pitch = c.probe_grid.pitch;
  const double span = (side - 1) * pitch + 2.0 * pitch;
  c.sim_grid.origin = c.probe_grid.origin - Eigen::Vector2d(pitch, pitch);
  c.sim_grid.width =
      static_cast<int>(std::lround(span / c.sim_grid.pixel_side));
  c.sim_grid.height = c.sim_grid.width;
  c.schedule.frame_interval = delta_t;
  c.schedule.start = 0.0;
  c.schedule.end = c.probe_grid.size() * (c.dwell + c.dead_time);
  return c;
}

double measure_e1_ns_per_call() {
  const int n = 1'000'000;
  volatile double guard = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < n; ++i) {
    guard = guard + e1(0.05 + 1e-5 * (i % 1000));
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return seconds / n * 1e9;
}

}  // namespace

BenchmarkResult run_benchmark(const std::vector<int>& sides,
                              const std::vector<double>& delta_ts,
                              const SimConfig& base, std::ostream& csv,
                              std::ostream& log) {
  std::vector<int> distinct = sides;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()),
                 distinct.end());
  if (distinct.size() < 4)
    throw std::invalid_argument(
        "run_benchmark: need at least 4 distinct probe counts for a fit");
  if (delta_ts.empty())
    throw std::invalid_argument("run_benchmark: need at least one delta_t");

  BenchmarkResult result;
  result.e1_ns_per_call = measure_e1_ns_per_call();
  csv << kBenchmarkCsvHeader << '\n';
  csv.precision(9);
  const int threads = resolve_threads(base.threads);
  for (double delta_t : delta_ts) {
    std::vector<double> log_n;
    std::vector<double> log_wall;
    for (int side : sides) {
      const SimConfig cell = benchmark_cell(base, side, delta_t);
      const ScanPlan plan = cell.make_plan();
      NullSink sink;
      const RenderSummary summary = render_sequence(
          cell.sim_grid, plan, cell.physical, cell.schedule, sink,
          cell.threads);
      BenchmarkRecord rec;
      rec.n_probes = side * side;
      rec.delta_t = delta_t;
      rec.delta_s = cell.sim_grid.pixel_side;
      rec.threads = threads;
      rec.wall_time = summary.wall_seconds;
      rec.e1_calls = summary.e1_calls;
      result.records.push_back(rec);
      csv << rec.n_probes << ',' << rec.delta_t << ',' << rec.delta_s << ','
          << rec.threads << ',' << rec.wall_time << ',' << rec.e1_calls
          << '\n';
      log << "benchmark n=" << rec.n_probes << " delta_t=" << delta_t
          << " wall_s=" << rec.wall_time << '\n';
      log_n.push_back(std::log(static_cast<double>(rec.n_probes)));
      log_wall.push_back(std::log(std::max(rec.wall_time, 1e-9)));
    }
    result.slopes.push_back(fit_slope(log_n, log_wall));
  }
  log.precision(4);
  log << "fitted log-log slope (wall vs N): " << result.slopes.front()
      << "  e1_ns_per_call=" << result.e1_ns_per_call << '\n';
  return result;
}

namespace {

using verification::ResidualSample;

// Deterministic residual sample set around one event: off-regime points a
// few diffusion widths out, on-regime points clear of the deposition
// source, and a couple of pre-activation points.
std::vector<ResidualSample> residual_samples(const ProbeEvent& event,
                                             const PhysicalParams& params,
                                             int count, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<ResidualSample> samples;
  samples.reserve(count);
  for (int i = 0; i < count; ++i) {
    ResidualSample s;
    const double angle = 2.0 * M_PI * unit(gen);
    const int kind = i % 5;
    double rho;
    if (kind == 0) {  // before activation
      s.time = event.start * unit(gen);
      rho = params.r_s * (2.0 + 10.0 * unit(gen));
    } else if (kind == 1) {  // on regime, outside the source footprint
      const double delta = event.dwell * (0.2 + 0.6 * unit(gen));
      s.time = event.start + delta;
      const double width =
          std::sqrt(2.0 * params.d_s() + 4.0 * params.d * delta);
      rho = std::max(10.0 * params.r_s, 0.5 * width) * (1.0 + unit(gen));
    } else {  // off regime
      const double delta = event.dwell * (1.2 + 2.5 * unit(gen));
      s.time = event.start + delta;
      const double width =
          std::sqrt(2.0 * params.d_s() + 4.0 * params.d * delta);
      rho = width * (0.4 + 2.0 * unit(gen));
    }
    s.point = event.position +
              rho * Eigen::Vector2d(std::cos(angle), std::sin(angle));
    samples.push_back(s);
  }
  return samples;
}

ValidationCheck check_line(std::ostream& log, std::string name, bool pass,
                           std::string detail) {
  log << (pass ? "PASS" : "FAIL") << ' ' << name << ": " << detail << '\n';
  return {std::move(name), pass, std::move(detail)};
}

}  // namespace

ValidationResult validate_config(const SimConfig& config, std::ostream& log,
                                 bool corrupt_q0_sign) {
  config.validate();
  ValidationResult result;
  const ScanPlan plan = config.make_plan();
  log.precision(6);
  if (plan.events.empty()) {
    result.checks.push_back(
        check_line(log, "plan", true, "no events; checks are vacuous"));
    result.pass = true;
    return result;
  }
  const ProbeEvent& event = plan.events.front();
  const PhysicalParams& params = config.physical;

  {  // PDE residual on 100 samples
    const auto report = verification::fick_residual(
        event, params, residual_samples(event, params, 100, 20240901), 1e-3);
    std::ostringstream detail;
    detail << "max_residual=" << report.max_residual << " accepted="
           << report.samples.size() << " rejected=" << report.rejected.size();
    result.checks.push_back(
        check_line(log, "fick_residual", report.pass, detail.str()));
  }

  {  // mass conservation during and after the dwell
    PhysicalParams mass_params = params;
    if (corrupt_q0_sign) mass_params.q0 = -mass_params.q0;
    bool pass = true;
    std::ostringstream detail;
    const char* label[2] = {"during_rel_err=", "after_rel_err="};
    int which = 0;
    for (const double t : {event.start + 0.5 * event.dwell,
                           event.start + 1.7 * event.dwell}) {
      const double radius =
          verification::mass_truncation_radius(event, params, t);
      const double mass =
          verification::mass_integral(event, mass_params, t, radius);
      const double expected =
          params.q0 * std::min(t - event.start, event.dwell);
      const double rel = std::abs(mass - expected) / expected;
      pass = pass && rel <= 1e-4;
      if (which > 0) detail << ' ';
      detail << label[which++] << rel;
    }
    result.checks.push_back(
        check_line(log, "mass_conservation", pass, detail.str()));
  }

  {  // brute-force frame comparison, scaled to the oracle limits
    SimConfig small = config;
    small.probe_grid.rows = std::min(config.probe_grid.rows, 8);
    small.probe_grid.cols = std::min(config.probe_grid.cols, 8);
    small.sim_grid.width = std::min(config.sim_grid.width, 32);
    small.sim_grid.height = std::min(config.sim_grid.height, 32);
    const ScanPlan small_plan = small.make_plan();
    double worst = 0.0;
    for (const double frac : {0.6, 1.2}) {
      const double t = frac * small_plan.duration();
      const FieldFrame ref = verification::reference_frame(
          small.sim_grid, small_plan, params, t);
      const FieldFrame got =
          render_frame(small.sim_grid, small_plan, params, t, small.threads);
      const double peak = ref.values.abs().maxCoeff();
      for (int v = 0; v < ref.values.rows(); ++v) {
        for (int u = 0; u < ref.values.cols(); ++u) {
          const double denom =
              std::max(std::abs(ref.values(v, u)), 1e-20 * peak + 1e-300);
          worst = std::max(
              worst, std::abs(got.values(v, u) - ref.values(v, u)) / denom);
        }
      }
    }
    std::ostringstream detail;
    detail << "max_rel_err=" << worst;
    result.checks.push_back(
        check_line(log, "reference_frame", worst <= 1e-10, detail.str()));
  }

  result.pass = std::all_of(result.checks.begin(), result.checks.end(),
                            [](const ValidationCheck& c) { return c.pass; });
  return result;
}

}  // namespace stemdiff
