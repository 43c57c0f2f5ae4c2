#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "stemdiff/diffusion_kernel.hpp"

using namespace stemdiff;

namespace {

// Unit-scale parameters: Q0 = 1, D = 1, r_s = 1 so D_s = 1.
const PhysicalParams kUnit{1.0, 1.0, 1.0};

ProbeEvent unit_event(double start = 0.0, double dwell = 1.0) {
  return {Eigen::Vector2d::Zero(), start, dwell};
}

}  // namespace

TEST_CASE("phi_on values") {
  const ProbeEvent event = unit_event();
  // Delta = 0: both E1 arguments coincide
  CHECK(phi_on({{1.0, 0.0}, 0.0}, event, kUnit) == 0.0);
  // rho^2 = 1, Delta = 1: e1_diff(1/6, 1/2)/(4 pi), frozen from quadrature
  CHECK(phi_on({{1.0, 0.0}, 1.0}, event, kUnit) ==
        doctest::Approx(0.064835092831731963).epsilon(1e-10));
  // linear in Q0
  PhysicalParams doubled = kUnit;
  doubled.q0 = 2.0;
  CHECK(phi_on({{1.0, 0.0}, 1.0}, event, doubled) ==
        2.0 * phi_on({{1.0, 0.0}, 1.0}, event, kUnit));
  CHECK_THROWS_AS(phi_on({{1.0, 0.0}, 2.0}, event, kUnit),
                  std::invalid_argument);
}

TEST_CASE("phi_off values") {
  const ProbeEvent event = unit_event();
  // rho^2 = 1, tau = 1, Delta = 2: (E1(1/10) - E1(1/6))/(4 pi), frozen
  // from the quadrature oracle
  CHECK(phi_off({{1.0, 0.0}, 2.0}, event, kUnit) ==
        doctest::Approx(0.035683219289340611).epsilon(1e-10));
  // boundary limit matches phi_on at t = tau
  const double on_val = phi_on({{1.0, 0.0}, 1.0}, event, kUnit);
  const double off_val = phi_off({{1.0, 0.0}, 1.0 + 1e-12}, event, kUnit);
  CHECK(off_val == doctest::Approx(on_val).epsilon(1e-9));
  // t -> infinity decays to zero
  CHECK(phi_off({{1.0, 0.0}, 1e12}, event, kUnit) <= 1e-11);
  CHECK(phi_off({{1.0, 0.0}, 1e12}, event, kUnit) >= 0.0);
  CHECK_THROWS_AS(phi_off({{1.0, 0.0}, 0.5}, event, kUnit),
                  std::invalid_argument);
}

TEST_CASE("phi_at_probe values") {
  const ProbeEvent event = unit_event();
  CHECK(phi_at_probe(0.0, event, kUnit) == 0.0);
  CHECK(phi_at_probe(1.0, event, kUnit) ==
        doctest::Approx(std::log(3.0) / (4.0 * std::numbers::pi))
            .epsilon(1e-14));
  CHECK(phi_at_probe(1e12, event, kUnit) <= 1e-11);
  CHECK_THROWS_AS(phi_at_probe(-0.5, event, kUnit), std::invalid_argument);
}

TEST_CASE("phi dispatch") {
  const ProbeEvent event{{3.0, -2.0}, 1.0, 1.0};
  // causality
  CHECK(phi({{3.5, -2.0}, 0.5}, event, kUnit) == 0.0);
  // coincident point uses the at-probe formula
  CHECK(phi({{3.0, -2.0}, 1.5}, event, kUnit) ==
        phi_at_probe(1.5, event, kUnit));
  // boundary t = start + dwell is the on branch, continuous with off
  const double at_boundary = phi({{4.0, -2.0}, 2.0}, event, kUnit);
  CHECK(at_boundary == phi_on({{4.0, -2.0}, 2.0}, event, kUnit));
  const double just_after = phi({{4.0, -2.0}, 2.0 + 1e-12}, event, kUnit);
  CHECK(std::abs(at_boundary - just_after) / at_boundary <= 1e-9);
}

TEST_CASE("phi is nonnegative") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> coord(-30.0, 30.0);
  std::uniform_real_distribution<double> time(0.0, 20.0);
  const ProbeEvent event{{0.5, 0.5}, 2.0, 3.0};
  for (int i = 0; i < 100000; ++i) {
    const double value =
        phi({{coord(gen), coord(gen)}, time(gen)}, event, kUnit);
    CHECK(value >= 0.0);
    CHECK(std::isfinite(value));
  }
}

TEST_CASE("phi is radially symmetric about the probe") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const ProbeEvent event{{1.0, 2.0}, 0.0, 1.0};
  for (int i = 0; i < 300; ++i) {
    const double rho = 0.1 + 8.0 * unit(gen);
    const double t = 0.1 + 5.0 * unit(gen);
    const double a0 = 2.0 * std::numbers::pi * unit(gen);
    const double a1 = 2.0 * std::numbers::pi * unit(gen);
    const Eigen::Vector2d p0 =
        event.position + rho * Eigen::Vector2d(std::cos(a0), std::sin(a0));
    const Eigen::Vector2d p1 =
        event.position + rho * Eigen::Vector2d(std::cos(a1), std::sin(a1));
    const double v0 = phi({p0, t}, event, kUnit);
    const double v1 = phi({p1, t}, event, kUnit);
    if (v0 == 0.0) {
      CHECK(v1 == 0.0);
    } else {
      CHECK(std::abs(v0 - v1) / v0 <= 1e-12);
    }
  }
}

TEST_CASE("phi grows during the dwell and at-probe decays after") {
  const ProbeEvent event = unit_event();
  double prev = -1.0;
  for (double t = 0.0; t <= 1.0; t += 0.05) {
    const double v = phi({{1.5, 0.0}, t}, event, kUnit);
    CHECK(v >= prev);
    prev = v;
  }
  prev = std::numeric_limits<double>::infinity();
  for (double t = 1.1; t < 10.0; t += 0.25) {
    const double v = phi_at_probe(t, event, kUnit);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("phi decreases with distance at fixed time") {
  const ProbeEvent event = unit_event();
  for (const double t : {0.4, 1.0, 2.5}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double rho = 0.2; rho < 12.0; rho *= 1.3) {
      const double v = phi({{rho, 0.0}, t}, event, kUnit);
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("continuity at the dwell boundary") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    PhysicalParams params{0.5 + unit(gen), 0.5 + unit(gen), 0.5 + unit(gen)};
    const ProbeEvent event{{unit(gen), unit(gen)}, unit(gen),
                           0.5 + unit(gen)};
    const double rho = (0.3 + 3.0 * unit(gen)) * params.r_s;
    const Eigen::Vector2d p = event.position + Eigen::Vector2d(rho, 0.0);
    const double eps = 1e-9 * event.dwell;
    const double on_side = phi({p, event.end() - eps}, event, params);
    const double off_side = phi({p, event.end() + eps}, event, params);
    if (on_side > 0.0)
      CHECK(std::abs(on_side - off_side) / on_side <= 1e-6);
  }
}
