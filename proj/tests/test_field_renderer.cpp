#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "stemdiff/field_renderer.hpp"
#include "stemdiff/verification.hpp"

using namespace stemdiff;

namespace {

const PhysicalParams kParams{1.0, 1e-12, 1e-9};

// 8x8 pixels of 1 nm centered on the origin area
const SimulationGrid kSmallGrid{{-4e-9, -4e-9}, 1e-9, 8, 8};

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name)
      : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("render_frame basics") {
  const ProbeGrid probes{2, 2, 2e-9, {-1e-9, -1e-9}};
  const ScanPlan plan = raster(probes, 1e-5, 0.0);

  SUBCASE("t = 0 field is zero everywhere") {
    const FieldFrame frame = render_frame(kSmallGrid, plan, kParams, 0.0);
    CHECK(frame.events_active == 1);
    CHECK((frame.values == 0.0).all());
  }

  SUBCASE("empty plan renders zero") {
    const ScanPlan empty{{}, {PatternKind::raster}, 1e-5, 0.0};
    const FieldFrame frame = render_frame(kSmallGrid, empty, kParams, 1e-4);
    CHECK(frame.events_active == 0);
    CHECK((frame.values == 0.0).all());
  }

  SUBCASE("pixel centered on the probe equals phi_at_probe") {
    // single probe at a pixel center
    const ProbeGrid one{1, 1, 2e-9, {-5e-10, -5e-10}};
    SimulationGrid grid = kSmallGrid;
    grid.origin = {-1e-9, -1e-9};
    grid.width = grid.height = 2;
    const ScanPlan single = raster(one, 1e-5, 0.0);
    const double t = 5e-6;
    const FieldFrame frame = render_frame(grid, single, kParams, t);
    CHECK(frame.values(0, 0) ==
          phi_at_probe(t, single.events[0], kParams));
    CHECK(frame.values(1, 1) ==
          phi({grid.pixel_center(1, 1), t}, single.events[0], kParams));
  }

  SUBCASE("superposition of event prefixes") {
    const double t = 1.7e-5;  // both events active
    ScanPlan first{{plan.events[0]}, plan.pattern, plan.dwell, 0.0};
    ScanPlan second{{plan.events[1]}, plan.pattern, plan.dwell, 0.0};
    ScanPlan both{{plan.events[0], plan.events[1]}, plan.pattern, plan.dwell,
                  0.0};
    const FieldFrame fa = render_frame(kSmallGrid, first, kParams, t);
    const FieldFrame fb = render_frame(kSmallGrid, second, kParams, t);
    const FieldFrame fab = render_frame(kSmallGrid, both, kParams, t);
    const double err =
        ((fab.values - (fa.values + fb.values)).abs() /
         fab.values.max(1e-300))
            .maxCoeff();
    CHECK(err <= 1e-12);
  }
}

TEST_CASE("render_frame matches the brute-force reference") {
  const ProbeGrid probes{4, 4, 2e-9, {-3e-9, -3e-9}};
  const ScanPlan plan = random_scan(probes, 2, 1e-5, 0.0);
  SimulationGrid grid{{-6e-9, -6e-9}, 7.5e-10, 16, 16};
  for (const double t : {4.2e-5, 1.1e-4, 2.5e-4}) {
    const FieldFrame ref = verification::reference_frame(grid, plan, kParams, t);
    const FieldFrame got = render_frame(grid, plan, kParams, t);
    const double peak = ref.values.maxCoeff();
    double worst = 0.0;
    for (int v = 0; v < 16; ++v) {
      for (int u = 0; u < 16; ++u) {
        const double denom =
            std::max(std::abs(ref.values(v, u)), 1e-20 * peak + 1e-300);
        worst = std::max(worst,
                         std::abs(got.values(v, u) - ref.values(v, u)) / denom);
      }
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("render_frame is bitwise deterministic across thread counts") {
  const ProbeGrid probes{3, 3, 2e-9, {-2e-9, -2e-9}};
  const ScanPlan plan = raster(probes, 1e-5, 0.0);
  SimulationGrid grid{{-5e-9, -5e-9}, 5e-10, 20, 20};
  const double t = 5.5e-5;
  const FieldFrame one = render_frame(grid, plan, kParams, t, 1);
  for (int threads : {2, 3, 8}) {
    const FieldFrame many = render_frame(grid, plan, kParams, t, threads);
    CHECK(std::memcmp(one.values.data(), many.values.data(),
                      sizeof(double) * one.values.size()) == 0);
  }
}

TEST_CASE("max_field") {
  FieldFrame frame;
  frame.values = Eigen::ArrayXXd::Zero(3, 4);
  CHECK(max_field(frame) == std::pair<std::int64_t, double>{0, 0.0});
  frame.values(1, 2) = 2.5;
  frame.values(2, 1) = 2.5;  // tie goes to the lower linear index
  CHECK(max_field(frame) == std::pair<std::int64_t, double>{6, 2.5});
  FieldFrame empty;
  CHECK_THROWS_AS(max_field(empty), std::invalid_argument);
}

TEST_CASE("render_sequence frame count and ordering") {
  const ProbeGrid probes{2, 2, 2e-9, {-1e-9, -1e-9}};
  const ScanPlan plan = raster(probes, 1e-5, 0.0);

  struct Collect : FrameSink {
    std::vector<double> timestamps;
    bool finalized = false;
    void consume(const FieldFrame& f) override {
      timestamps.push_back(f.timestamp);
    }
    void finalize() override { finalized = true; }
  };

  Collect sink;
  FrameSchedule schedule{1e-5, 0.0, 4e-5};
  const RenderSummary summary =
      render_sequence(kSmallGrid, plan, kParams, schedule, sink);
  CHECK(summary.frames == 5);
  CHECK(sink.timestamps.size() == 5);
  CHECK(std::is_sorted(sink.timestamps.begin(), sink.timestamps.end()));
  CHECK(sink.finalized);
  CHECK(summary.peak_value > 0.0);

  Collect single;
  const FrameSchedule one{1e-5, 2e-5, 2e-5};
  CHECK(render_sequence(kSmallGrid, plan, kParams, one, single).frames == 1);
}

TEST_CASE("raw float32 sink writes parseable frames") {
  TempDir dir("stemdiff_rawf32_test");
  const ProbeGrid probes{1, 1, 2e-9, {0.0, 0.0}};
  const ScanPlan plan = raster(probes, 1e-5, 0.0);
  RawF32Sink sink(dir.path, "frame");
  const FieldFrame frame = render_frame(kSmallGrid, plan, kParams, 5e-6);
  sink.consume(frame);

  std::ifstream in(dir.path / "frame_000000.f32", std::ios::binary);
  REQUIRE(in.good());
  std::string magic, key;
  int version, width, height;
  double timestamp;
  std::string units_key, units;
  in >> magic >> version >> key >> width >> key >> height >> key >> timestamp
      >> units_key >> units;
  CHECK(magic == "STEMDIFF-F32");
  CHECK(width == 8);
  CHECK(height == 8);
  CHECK(timestamp == 5e-6);
  CHECK(units == "u/m^2");
  in.ignore(1);  // newline before the binary payload
  std::vector<float> data(64);
  in.read(reinterpret_cast<char*>(data.data()), 64 * sizeof(float));
  REQUIRE(in.good());
  for (int v = 0; v < 8; ++v) {
    for (int u = 0; u < 8; ++u) {
      CHECK(data[v * 8 + u] == static_cast<float>(frame.values(v, u)));
    }
  }
}

TEST_CASE("pgm16 sink normalizes per sequence with a sidecar") {
  TempDir dir("stemdiff_pgm_test");
  Pgm16Sink sink(dir.path, "frame");
  FieldFrame a;
  a.values = Eigen::ArrayXXd::Zero(2, 2);
  a.values(0, 0) = 1.0;
  FieldFrame b;
  b.values = Eigen::ArrayXXd::Zero(2, 2);
  b.values(1, 1) = 4.0;  // sequence max
  sink.consume(a);
  sink.consume(b);
  sink.finalize();

  std::ifstream pgm(dir.path / "frame_000000.pgm", std::ios::binary);
  REQUIRE(pgm.good());
  std::string magic;
  int w, h, maxval;
  pgm >> magic >> w >> h >> maxval;
  CHECK(magic == "P5");
  CHECK(maxval == 65535);
  pgm.ignore(1);
  unsigned char raw[8];
  pgm.read(reinterpret_cast<char*>(raw), 8);
  // pixel (0,0) of frame 0 is 1.0 / 4.0 of the sequence max
  const int g00 = raw[0] * 256 + raw[1];
  CHECK(g00 == 16384);

  std::ifstream side(dir.path / "frame_normalization.txt");
  REQUIRE(side.good());
  std::string k;
  double max_value;
  side >> k >> max_value;
  CHECK(k == "max_value_u_per_m2");
  CHECK(max_value == 4.0);
}

TEST_CASE("csv sink emits the documented schema") {
  TempDir dir("stemdiff_csv_test");
  CsvSink sink(dir.path, "frame");
  FieldFrame a;
  a.values = Eigen::ArrayXXd::Zero(1, 2);
  a.values(0, 1) = 0.5;
  sink.consume(a);
  std::ifstream in(dir.path / "frame_000000.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "row,col,value");
  std::getline(in, line);
  CHECK(line == "0,0,0");
  std::getline(in, line);
  CHECK(line == "0,1,0.5");
}

TEST_CASE("make_sink rejects unknown formats") {
  CHECK_THROWS_AS(make_sink("tiff", ".", "frame"), std::invalid_argument);
}
