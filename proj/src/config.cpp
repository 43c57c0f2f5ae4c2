#include "stemdiff/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace stemdiff {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (key.starts_with("_")) continue;  // comment keys
    if (!allowed.contains(key)) {
      throw std::invalid_argument("config: unknown key \"" + where + "." +
                                  key + "\"");
    }
  }
}

double require_number(const json& obj, const std::string& where,
                      const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number())
    throw std::invalid_argument("config: " + where + "." + key +
                                " must be a number");
  return obj.at(key).get<double>();
}

Eigen::Vector2d read_vec2(const json& obj, const std::string& where,
                          const std::string& key, Eigen::Vector2d fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 2)
    throw std::invalid_argument("config: " + where + "." + key +
                                " must be [x, y]");
  return {v.at(0).get<double>(), v.at(1).get<double>()};
}

}  // namespace

ScanPlan SimConfig::make_plan() const {
  switch (pattern.kind) {
    case PatternKind::raster:
      return raster(probe_grid, dwell, dead_time);
    case PatternKind::interleaved:
      return interleaved(probe_grid, pattern.factor, dwell, dead_time);
    case PatternKind::random:
      return random_scan(probe_grid, pattern.seed, dwell, dead_time);
    case PatternKind::subsampled:
      return subsampled(probe_grid, pattern.ratio, pattern.seed, dwell,
                        dead_time);
  }
  throw std::logic_error("unknown PatternKind");
}

void SimConfig::validate() const {
  physical.validate();
  probe_grid.validate();
  sim_grid.validate();
  schedule.validate();
  if (!(dwell > 0.0)) throw std::invalid_argument("config: scan.dwell must be > 0");
  if (!(dead_time >= 0.0))
    throw std::invalid_argument("config: scan.dead_time must be >= 0");
  if (pattern.kind == PatternKind::interleaved &&
      (pattern.factor < 1 || pattern.factor > probe_grid.size()))
    throw std::invalid_argument("config: scan.factor must be in [1, N]");
  if (pattern.kind == PatternKind::subsampled &&
      (!(pattern.ratio > 0.0) || pattern.ratio > 1.0))
    throw std::invalid_argument("config: scan.ratio must be in (0, 1]");
  if (output_format != "rawf32" && output_format != "pgm16" &&
      output_format != "csv")
    throw std::invalid_argument(
        "config: output.format must be rawf32, pgm16 or csv");
  if (threads < 0)
    throw std::invalid_argument("config: threads must be >= 0 or \"auto\"");
}

SimConfig default_config() {
  SimConfig c;
  c.physical = {1.0, 1e-12, 1e-9};
  c.probe_grid = {20, 20, 2e-9, Eigen::Vector2d::Zero()};
  c.pattern = {PatternKind::raster};
  c.dwell = 1e-5;
  c.dead_time = 0.0;
  const double pitch = c.probe_grid.pitch;
  const double delta_s = pitch / 4.0;
  // one-pitch margin around the scanned extent
  const double span_x = (c.probe_grid.cols - 1) * pitch + 2.0 * pitch;
  const double span_y = (c.probe_grid.rows - 1) * pitch + 2.0 * pitch;
  c.sim_grid.origin = c.probe_grid.origin - Eigen::Vector2d(pitch, pitch);
  c.sim_grid.pixel_side = delta_s;
  c.sim_grid.width = static_cast<int>(std::lround(span_x / delta_s));
  c.sim_grid.height = static_cast<int>(std::lround(span_y / delta_s));
  c.schedule.frame_interval = 1e-5;
  c.schedule.start = 0.0;
  c.schedule.end = c.probe_grid.size() * (c.dwell + c.dead_time);
  return c;
}

SimConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& err) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") +
                                err.what());
  }
  check_keys(root, "", {"physical", "probe_grid", "scan", "sim_grid",
                        "schedule", "output", "threads"});
  SimConfig c = default_config();

  if (root.contains("physical")) {
    const json& p = root.at("physical");
    check_keys(p, "physical", {"q0", "d", "r_s"});
    c.physical.q0 = require_number(p, "physical", "q0", c.physical.q0);
    c.physical.d = require_number(p, "physical", "d", c.physical.d);
    c.physical.r_s = require_number(p, "physical", "r_s", c.physical.r_s);
  }
  if (root.contains("probe_grid")) {
    const json& g = root.at("probe_grid");
    check_keys(g, "probe_grid", {"rows", "cols", "pitch", "origin"});
    c.probe_grid.rows = static_cast<int>(
        require_number(g, "probe_grid", "rows", c.probe_grid.rows));
    c.probe_grid.cols = static_cast<int>(
        require_number(g, "probe_grid", "cols", c.probe_grid.cols));
    c.probe_grid.pitch =
        require_number(g, "probe_grid", "pitch", c.probe_grid.pitch);
    c.probe_grid.origin =
        read_vec2(g, "probe_grid", "origin", c.probe_grid.origin);
  }
  if (root.contains("scan")) {
    const json& s = root.at("scan");
    check_keys(s, "scan",
               {"pattern", "factor", "ratio", "seed", "dwell", "dead_time"});
    if (s.contains("pattern"))
      c.pattern.kind = pattern_kind_from_string(s.at("pattern").get<std::string>());
    c.pattern.factor =
        static_cast<int>(require_number(s, "scan", "factor", c.pattern.factor));
    c.pattern.ratio = require_number(s, "scan", "ratio", c.pattern.ratio);
    c.pattern.seed = static_cast<std::uint64_t>(require_number(
        s, "scan", "seed", static_cast<double>(c.pattern.seed)));
    c.dwell = require_number(s, "scan", "dwell", c.dwell);
    c.dead_time = require_number(s, "scan", "dead_time", c.dead_time);
  }
  if (root.contains("sim_grid")) {
    const json& g = root.at("sim_grid");
    check_keys(g, "sim_grid", {"origin", "pixel_side", "width", "height"});
    c.sim_grid.origin = read_vec2(g, "sim_grid", "origin", c.sim_grid.origin);
    c.sim_grid.pixel_side =
        require_number(g, "sim_grid", "pixel_side", c.sim_grid.pixel_side);
    c.sim_grid.width = static_cast<int>(
        require_number(g, "sim_grid", "width", c.sim_grid.width));
    c.sim_grid.height = static_cast<int>(
        require_number(g, "sim_grid", "height", c.sim_grid.height));
  }
  if (root.contains("schedule")) {
    const json& s = root.at("schedule");
    check_keys(s, "schedule", {"frame_interval", "start", "end"});
    c.schedule.frame_interval = require_number(s, "schedule", "frame_interval",
                                               c.schedule.frame_interval);
    c.schedule.start = require_number(s, "schedule", "start", c.schedule.start);
    c.schedule.end = require_number(s, "schedule", "end", c.schedule.end);
  }
  if (root.contains("output")) {
    const json& o = root.at("output");
    check_keys(o, "output", {"format", "directory", "stem"});
    if (o.contains("format")) c.output_format = o.at("format").get<std::string>();
    if (o.contains("directory"))
      c.output_directory = o.at("directory").get<std::string>();
    if (o.contains("stem")) c.output_stem = o.at("stem").get<std::string>();
  }
  if (root.contains("threads")) {
    const json& t = root.at("threads");
    if (t.is_string()) {
      if (t.get<std::string>() != "auto")
        throw std::invalid_argument("config: threads must be a count or \"auto\"");
      c.threads = 0;
    } else if (t.is_number_integer()) {
      c.threads = t.get<int>();
    } else {
      throw std::invalid_argument("config: threads must be a count or \"auto\"");
    }
  }
  c.validate();
  return c;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

namespace {

json config_to_json(const SimConfig& c) {
  json root;
  root["physical"] = {{"q0", c.physical.q0},
                      {"d", c.physical.d},
                      {"r_s", c.physical.r_s}};
  root["probe_grid"] = {{"rows", c.probe_grid.rows},
                        {"cols", c.probe_grid.cols},
                        {"pitch", c.probe_grid.pitch},
                        {"origin", {c.probe_grid.origin.x(),
                                    c.probe_grid.origin.y()}}};
  root["scan"] = {{"pattern", to_string(c.pattern.kind)},
                  {"factor", c.pattern.factor},
                  {"ratio", c.pattern.ratio},
                  {"seed", static_cast<double>(c.pattern.seed)},
                  {"dwell", c.dwell},
                  {"dead_time", c.dead_time}};
  root["sim_grid"] = {{"origin", {c.sim_grid.origin.x(), c.sim_grid.origin.y()}},
                      {"pixel_side", c.sim_grid.pixel_side},
                      {"width", c.sim_grid.width},
                      {"height", c.sim_grid.height}};
  root["schedule"] = {{"frame_interval", c.schedule.frame_interval},
                      {"start", c.schedule.start},
                      {"end", c.schedule.end}};
  root["output"] = {{"format", c.output_format},
                    {"directory", c.output_directory.string()},
                    {"stem", c.output_stem}};
  if (c.threads == 0) {
    root["threads"] = "auto";
  } else {
    root["threads"] = c.threads;
  }
  return root;
}

}  // namespace

std::string serialize_config(const SimConfig& config) {
  return config_to_json(config).dump(2) + "\n";
}

std::string commented_default_config() {
  json root = config_to_json(default_config());
  root["physical"]["_comment"] =
      "q0 u/s, d m^2/s, r_s m; placeholder values, not fitted to a material";
  root["probe_grid"]["_comment"] =
      "probe lattice: rows x cols sites spaced by pitch (m) from origin";
  root["scan"]["_comment"] =
      "pattern: raster | interleaved | random | subsampled; factor for "
      "interleaved, ratio+seed for subsampled, seed for random; times in s";
  root["sim_grid"]["_comment"] =
      "rendered pixel lattice; pixel_side is the resolution in m";
  root["schedule"]["_comment"] =
      "frames at start + k * frame_interval up to end, in s";
  root["output"]["_comment"] = "format: rawf32 | pgm16 | csv";
  root["_comment"] =
      "threads: worker count or \"auto\" (STEMDIFF_THREADS overrides auto)";
  return root.dump(2) + "\n";
}

}  // namespace stemdiff
