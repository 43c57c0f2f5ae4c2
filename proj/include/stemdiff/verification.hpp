#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "stemdiff/diffusion_kernel.hpp"
#include "stemdiff/field_renderer.hpp"
#include "stemdiff/scan_patterns.hpp"

// Numerical oracles that cross-check the closed-form implementation.
// Everything here is single-threaded and shares no computation with the
// optimized kernel or renderer paths.
namespace stemdiff::verification {

// Adaptive Gauss-Kronrod integration of f over [a, b] to the given
// tolerances. Throws std::runtime_error if the adaptation does not
// converge.
double adaptive_integrate(const std::function<double(double)>& f, double a,
                          double b, double abs_tol, double rel_tol);

// E1(x) by adaptive quadrature of the defining integral, evaluated as
// integral_0^smax exp(-x e^s) ds after the substitution u = x e^s.
// Absolute tolerance 1e-14 or relative 1e-12, whichever is looser.
double quadrature_e1(double x);

struct ResidualSample {
  Eigen::Vector2d point = Eigen::Vector2d::Zero();
  double time = 0.0;
};

struct ResidualReport {
  std::vector<ResidualSample> samples;   // accepted samples
  std::vector<double> residuals;         // one per accepted sample
  std::vector<ResidualSample> rejected;  // boundary / coincident / sourced
  double max_residual = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

// Relative residual of the homogeneous diffusion equation
// |dphi/dt - D laplacian(phi)| / max(|dphi/dt|, D |laplacian(phi)|, floor)
// by central differences. Spatial step 1e-3 sqrt(2 D_s + 4 D delta),
// temporal step 1e-3 delta, shrunk near the dwell boundary.
//
// Rejected: coincident points, samples too close to the dwell boundary
// for the stencil, and on-regime samples within 8 r_s of the probe where
// the deposition source makes the homogeneous residual meaningless.
ResidualReport fick_residual(const ProbeEvent& event,
                             const PhysicalParams& params,
                             const std::vector<ResidualSample>& samples,
                             double threshold = 1e-3);

void write_report(std::ostream& out, const ResidualReport& report);

// Deposited mass 2 pi integral_0^R phi(rho) rho drho by adaptive radial
// quadrature. Should equal Q0 (t - t_i) during the dwell and Q0 tau_i
// after. The truncation radius must satisfy
// R^2 >= 40 (2 D_s + 4 D (t - t_i)) so the tail is below 1e-6 of the
// total (tail bound: integral_x^inf E1(s) ds <= exp(-x)).
double mass_integral(const ProbeEvent& event, const PhysicalParams& params,
                     double t, double truncation_radius);

// Suggested truncation radius for mass_integral at time t.
double mass_truncation_radius(const ProbeEvent& event,
                              const PhysicalParams& params, double t);

// Brute-force frame: naive pixels-x-events double loop, E1 by quadrature.
// Refuses grids over 64x64 pixels or plans over 256 events so the oracle
// stays auditable.
FieldFrame reference_frame(const SimulationGrid& grid, const ScanPlan& plan,
                           const PhysicalParams& params, double t);

}  // namespace stemdiff::verification
