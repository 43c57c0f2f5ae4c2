#include "stemdiff/scan_patterns.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

namespace stemdiff {

namespace {

// Unbiased draw from [0, n) via rejection; keeps shuffles portable.
std::uint64_t bounded_draw(std::mt19937_64& gen, std::uint64_t n) {
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = gen();
  } while (v >= limit);
  return v % n;
}

void fisher_yates(std::vector<int>& order, std::mt19937_64& gen) {
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(bounded_draw(gen, i));
    std::swap(order[i - 1], order[j]);
  }
}

ScanPlan plan_from_order(const ProbeGrid& grid, const std::vector<int>& order,
                         PatternDescriptor pattern, double dwell,
                         double dead_time) {
  if (!(dwell > 0.0)) throw std::invalid_argument("scan: dwell must be > 0");
  if (!(dead_time >= 0.0))
    throw std::invalid_argument("scan: dead_time must be >= 0");
  ScanPlan plan;
  plan.pattern = pattern;
  plan.dwell = dwell;
  plan.dead_time = dead_time;
  plan.events.reserve(order.size());
  const double period = dwell + dead_time;
  for (std::size_t k = 0; k < order.size(); ++k) {
    plan.events.push_back(
        {grid.site(order[k]), static_cast<double>(k) * period, dwell});
  }
  return plan;
}

}  // namespace

Eigen::Vector2d ProbeGrid::site(int linear_index) const {
  const int row = linear_index / cols;
  const int col = linear_index % cols;
  return origin + Eigen::Vector2d(col * pitch, row * pitch);
}

void ProbeGrid::validate() const {
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("ProbeGrid: rows and cols must be >= 1");
  if (!(pitch > 0.0) || !std::isfinite(pitch))
    throw std::invalid_argument("ProbeGrid: pitch must be positive");
  if (!origin.allFinite())
    throw std::invalid_argument("ProbeGrid: origin must be finite");
}

std::string to_string(PatternKind kind) {
  switch (kind) {
    case PatternKind::raster: return "raster";
    case PatternKind::interleaved: return "interleaved";
    case PatternKind::random: return "random";
    case PatternKind::subsampled: return "subsampled";
  }
  throw std::logic_error("unknown PatternKind");
}

PatternKind pattern_kind_from_string(const std::string& name) {
  if (name == "raster") return PatternKind::raster;
  if (name == "interleaved") return PatternKind::interleaved;
  if (name == "random") return PatternKind::random;
  if (name == "subsampled") return PatternKind::subsampled;
  throw std::invalid_argument("unknown scan pattern: " + name);
}

double ScanPlan::duration() const {
  if (events.empty()) return 0.0;
  return events.back().end();
}

ScanPlan raster(const ProbeGrid& grid, double dwell, double dead_time) {
  grid.validate();
  std::vector<int> order(grid.size());
  std::iota(order.begin(), order.end(), 0);
  return plan_from_order(grid, order, {PatternKind::raster}, dwell, dead_time);
}

ScanPlan interleaved(const ProbeGrid& grid, int factor, double dwell,
                     double dead_time) {
  grid.validate();
  const int n = grid.size();
  if (factor < 1 || factor > n)
    throw std::invalid_argument("interleaved: factor must be in [1, N]");
  std::vector<int> order;
  order.reserve(n);
  for (int pass = 0; pass < factor; ++pass) {
    for (int i = pass; i < n; i += factor) order.push_back(i);
  }
  PatternDescriptor pattern{PatternKind::interleaved};
  pattern.factor = factor;
  return plan_from_order(grid, order, pattern, dwell, dead_time);
}

ScanPlan random_scan(const ProbeGrid& grid, std::uint64_t seed, double dwell,
                     double dead_time) {
  grid.validate();
  std::vector<int> order(grid.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 gen(seed);
  fisher_yates(order, gen);
  PatternDescriptor pattern{PatternKind::random};
  pattern.seed = seed;
  return plan_from_order(grid, order, pattern, dwell, dead_time);
}

ScanPlan subsampled(const ProbeGrid& grid, double ratio, std::uint64_t seed,
                    double dwell, double dead_time) {
  grid.validate();
  if (!(ratio > 0.0) || ratio > 1.0)
    throw std::invalid_argument("subsampled: ratio must be in (0, 1]");
  const int n = grid.size();
  const int k = static_cast<int>(std::ceil(ratio * n));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 gen(seed);
  fisher_yates(order, gen);
  order.resize(k);
  std::sort(order.begin(), order.end());
  PatternDescriptor pattern{PatternKind::subsampled};
  pattern.ratio = ratio;
  pattern.seed = seed;
  return plan_from_order(grid, order, pattern, dwell, dead_time);
}

void write_plan(std::ostream& out, const ScanPlan& plan) {
  out.precision(17);
  for (std::size_t i = 0; i < plan.events.size(); ++i) {
    const ProbeEvent& e = plan.events[i];
    out << i << ' ' << e.position.x() << ' ' << e.position.y() << ' '
        << e.start << ' ' << e.dwell << '\n';
  }
}

}  // namespace stemdiff
