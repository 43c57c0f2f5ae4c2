#pragma once

#include <Eigen/Core>

namespace stemdiff {

// Deposition rate q0 (u/s), diffusion coefficient d (m^2/s), probe radius
// r_s (m). The squared radius d_s is always derived, never stored.
struct PhysicalParams {
  double q0 = 1.0;
  double d = 1e-12;
  double r_s = 1e-9;

  double d_s() const { return r_s * r_s; }
  void validate() const;  // throws std::invalid_argument on bad values
};

// One probe activation: dwell at `position` starting at `start` for `dwell`.
struct ProbeEvent {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double start = 0.0;
  double dwell = 0.0;

  double end() const { return start + dwell; }
  void validate() const;
};

// A point in space and time at which the field is evaluated.
struct FieldQuery {
  Eigen::Vector2d point = Eigen::Vector2d::Zero();
  double time = 0.0;
};

// Query points within this fraction of r_s from the probe position are
// treated as coincident and evaluated with the at-probe formulas.
constexpr double kCoincidenceFraction = 1e-9;

// Single-probe concentration while the beam is on
// (event.start <= time <= event.end()), off-probe points only.
double phi_on(const FieldQuery& query, const ProbeEvent& event,
              const PhysicalParams& params);

// Single-probe concentration after the beam switched off
// (time > event.end()), off-probe points only.
double phi_off(const FieldQuery& query, const ProbeEvent& event,
               const PhysicalParams& params);

// Concentration at the probe position itself, on or off regime.
double phi_at_probe(double time, const ProbeEvent& event,
                    const PhysicalParams& params);

// Total dispatcher: 0 before activation, at-probe formulas for coincident
// points, otherwise the on/off branch. The dwell boundary t = start + dwell
// belongs to the on branch. Total over valid inputs.
double phi(const FieldQuery& query, const ProbeEvent& event,
           const PhysicalParams& params);

}  // namespace stemdiff
