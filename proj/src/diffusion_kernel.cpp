#include "stemdiff/diffusion_kernel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "stemdiff/special_functions.hpp"

namespace stemdiff {

namespace {

double prefactor(const PhysicalParams& p) {
  return p.q0 / (4.0 * std::numbers::pi * p.d);
}

double rho_squared(const FieldQuery& q, const ProbeEvent& e) {
  return (q.point - e.position).squaredNorm();
}

}  // namespace

void PhysicalParams::validate() const {
  if (!(q0 > 0.0) || !std::isfinite(q0))
    throw std::invalid_argument("PhysicalParams: q0 must be positive");
  if (!(d > 0.0) || !std::isfinite(d))
    throw std::invalid_argument("PhysicalParams: d must be positive");
  if (!(r_s > 0.0) || !std::isfinite(r_s))
    throw std::invalid_argument("PhysicalParams: r_s must be positive");
}

void ProbeEvent::validate() const {
  if (!(dwell > 0.0) || !std::isfinite(dwell))
    throw std::invalid_argument("ProbeEvent: dwell must be positive");
  if (!(start >= 0.0) || !std::isfinite(start))
    throw std::invalid_argument("ProbeEvent: start must be nonnegative");
  if (!position.allFinite())
    throw std::invalid_argument("ProbeEvent: position must be finite");
}

double phi_on(const FieldQuery& query, const ProbeEvent& event,
              const PhysicalParams& params) {
  if (query.time < event.start || query.time > event.end())
    throw std::invalid_argument("phi_on: time outside the on-interval");
  const double delta = query.time - event.start;
  const double r2 = rho_squared(query, event);
  const double two_ds = 2.0 * params.d_s();
  return prefactor(params) *
         e1_diff(r2 / (two_ds + 4.0 * params.d * delta), r2 / two_ds);
}

double phi_off(const FieldQuery& query, const ProbeEvent& event,
               const PhysicalParams& params) {
  if (query.time <= event.end())
    throw std::invalid_argument("phi_off: time inside the on-interval");
  const double delta = query.time - event.start;
  const double r2 = rho_squared(query, event);
  const double two_ds = 2.0 * params.d_s();
  return prefactor(params) *
         e1_diff(r2 / (two_ds + 4.0 * params.d * delta),
                 r2 / (two_ds + 4.0 * params.d * (delta - event.dwell)));
}

double phi_at_probe(double time, const ProbeEvent& event,
                    const PhysicalParams& params) {
  if (time < event.start)
    throw std::invalid_argument("phi_at_probe: time before activation");
  const double delta = time - event.start;
  const double ds = params.d_s();
  if (delta <= event.dwell) {
    return prefactor(params) * std::log1p(2.0 * params.d * delta / ds);
  }
  return prefactor(params) *
         std::log1p(2.0 * params.d * event.dwell /
                    (ds + 2.0 * params.d * (delta - event.dwell)));
}

double phi(const FieldQuery& query, const ProbeEvent& event,
           const PhysicalParams& params) {
  if (query.time < event.start) return 0.0;
  const double dist2 = rho_squared(query, event);
  const double thresh = kCoincidenceFraction * params.r_s;
  if (dist2 <= thresh * thresh) return phi_at_probe(query.time, event, params);
  if (query.time <= event.end()) return phi_on(query, event, params);
  return phi_off(query, event, params);
}

}  // namespace stemdiff
