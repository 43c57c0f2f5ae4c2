#include "stemdiff/verification.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace stemdiff::verification {

namespace {

// 15-point Gauss-Kronrod rule with embedded 7-point Gauss rule
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct RuleResult {
  double integral;
  double error;
};

RuleResult gauss_kronrod(const std::function<double(double)>& f, double a,
                         double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double f_mid = f(mid);
  double kronrod = kWgk[7] * f_mid;
  double gauss = kWg[3] * f_mid;
  for (int i = 0; i < 7; ++i) {
    const double pair = f(mid - half * kXgk[i]) + f(mid + half * kXgk[i]);
    kronrod += kWgk[i] * pair;
    if (i % 2 == 1) gauss += kWg[i / 2] * pair;
  }
  return {half * kronrod, std::abs(half * (kronrod - gauss))};
}

double integrate_recursive(const std::function<double(double)>& f, double a,
                           double b, double abs_tol, double rel_tol,
                           int depth) {
  const RuleResult r = gauss_kronrod(f, a, b);
  const double tol = std::max(abs_tol, rel_tol * std::abs(r.integral));
  if (r.error <= tol || depth >= 48) {
    if (depth >= 48 && r.error > 1e3 * std::max(tol, 1e-300))
      throw std::runtime_error("adaptive_integrate: no convergence");
    return r.integral;
  }
  const double mid = 0.5 * (a + b);
  return integrate_recursive(f, a, mid, 0.5 * abs_tol, rel_tol, depth + 1) +
         integrate_recursive(f, mid, b, 0.5 * abs_tol, rel_tol, depth + 1);
}

constexpr double kRefEulerGamma = 0.57721566490153286060;

// E1(a) - E1(b) for the brute-force path, written independently of
// stemdiff::e1_diff: small arguments via ln(b/a) plus the alternating
// series, nearby arguments by integrating exp(-u)/u over [a, b],
// everything else by two quadrature evaluations.
double ref_e1_difference(double a, double b) {
  if (a == b) return 0.0;
  if (a == 0.0) return std::numeric_limits<double>::infinity();
  if (b == 0.0) return -std::numeric_limits<double>::infinity();
  if (a <= 0.05 && b <= 0.05) {
    double sum = std::log(b / a);
    double ta = 1.0, tb = 1.0;
    for (int n = 1; n <= 30; ++n) {
      ta *= -a / n;
      tb *= -b / n;
      sum -= (ta - tb) / n;
      if (std::abs(ta) + std::abs(tb) < 1e-20) break;
    }
    return sum;
  }
  const double ratio = a / b;
  if (ratio > 0.5 && ratio < 2.0 && std::abs(b - a) <= 2.0) {
    return adaptive_integrate([](double u) { return std::exp(-u) / u; }, a, b,
                              1e-300, 1e-13);
  }
  return quadrature_e1(a) - quadrature_e1(b);
}

}  // namespace

double adaptive_integrate(const std::function<double(double)>& f, double a,
                          double b, double abs_tol, double rel_tol) {
  if (a == b) return 0.0;
  return integrate_recursive(f, a, b, abs_tol, rel_tol, 0);
}

double quadrature_e1(double x) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw std::domain_error("quadrature_e1: argument must be positive");
  if (x >= 745.0) return 0.0;
  // u = x e^s maps the integral to int_0^smax exp(-x e^s) ds; the factor
  // exp(-x) is pulled out so the tolerance stays relative to the result
  // even deep in the exponential tail
  const double s_max = std::log1p(745.0 / x);
  const auto integrand = [x](double s) {
    return std::exp(-x * std::expm1(s));
  };
  const double scale = std::abs(gauss_kronrod(integrand, 0.0, s_max).integral);
  const double value = adaptive_integrate(integrand, 0.0, s_max,
                                          1e-16 * scale + 1e-305, 1e-13);
  return std::exp(-x) * value;
}

ResidualReport fick_residual(const ProbeEvent& event,
                             const PhysicalParams& params,
                             const std::vector<ResidualSample>& samples,
                             double threshold) {
  event.validate();
  params.validate();
  ResidualReport report;
  report.threshold = threshold;
  const double coincidence = kCoincidenceFraction * params.r_s;
  for (const ResidualSample& s : samples) {
    const double rho = (s.point - event.position).norm();
    if (rho <= coincidence) {
      report.rejected.push_back(s);
      continue;
    }
    if (s.time < event.start) {
      report.samples.push_back(s);
      report.residuals.push_back(0.0);
      continue;
    }
    const double delta = s.time - event.start;
    const double k = 1e-3 * delta;
    const bool on = delta <= event.dwell;
    if (k <= 0.0 || (on && event.dwell - delta < 2.0 * k) ||
        (!on && delta - event.dwell < 2.0 * k)) {
      report.rejected.push_back(s);  // dwell boundary inside the stencil
      continue;
    }
    if (on && rho < 8.0 * params.r_s) {
      report.rejected.push_back(s);  // deposition source not negligible
      continue;
    }
    const double h =
        1e-3 * std::sqrt(2.0 * params.d_s() + 4.0 * params.d * delta);
    const auto at = [&](double dx, double dy, double dt) {
      return phi({s.point + Eigen::Vector2d(dx, dy), s.time + dt}, event,
                 params);
    };
    const double center = at(0, 0, 0);
    const double dphidt = (at(0, 0, k) - at(0, 0, -k)) / (2.0 * k);
    const double lap = (at(h, 0, 0) + at(-h, 0, 0) + at(0, h, 0) +
                        at(0, -h, 0) - 4.0 * center) /
                       (h * h);
    const double diffusive = params.d * lap;
    const double denom =
        std::max({std::abs(dphidt), std::abs(diffusive), 1e-300});
    report.samples.push_back(s);
    report.residuals.push_back(std::abs(dphidt - diffusive) / denom);
  }
  for (double r : report.residuals)
    report.max_residual = std::max(report.max_residual, r);
  report.pass = report.max_residual <= threshold;
  return report;
}

void write_report(std::ostream& out, const ResidualReport& report) {
  out.precision(17);
  out << "fick_residual_report\n"
      << "threshold " << report.threshold << '\n'
      << "accepted " << report.samples.size() << '\n'
      << "rejected " << report.rejected.size() << '\n'
      << "max_residual " << report.max_residual << '\n'
      << "pass " << (report.pass ? 1 : 0) << '\n';
  for (std::size_t i = 0; i < report.samples.size(); ++i) {
    const ResidualSample& s = report.samples[i];
    out << "sample " << s.point.x() << ' ' << s.point.y() << ' ' << s.time
        << ' ' << report.residuals[i] << '\n';
  }
}

double mass_truncation_radius(const ProbeEvent& event,
                              const PhysicalParams& params, double t) {
  const double delta = std::max(t - event.start, 0.0);
  return std::sqrt(40.0 * (2.0 * params.d_s() + 4.0 * params.d * delta));
}

double mass_integral(const ProbeEvent& event, const PhysicalParams& params,
                     double t, double truncation_radius) {
  event.validate();
  if (t <= event.start) return 0.0;
  const double expected_scale =
      std::abs(params.q0) * std::min(t - event.start, event.dwell);
  const auto integrand = [&](double rho) {
    const FieldQuery q{event.position + Eigen::Vector2d(rho, 0.0), t};
    return 2.0 * std::numbers::pi * rho * phi(q, event, params);
  };
  return adaptive_integrate(integrand, 0.0, truncation_radius,
                            1e-10 * expected_scale, 1e-7);
}

FieldFrame reference_frame(const SimulationGrid& grid, const ScanPlan& plan,
                           const PhysicalParams& params, double t) {
  grid.validate();
  params.validate();
  if (grid.width > 64 || grid.height > 64)
    throw std::invalid_argument("reference_frame: grid larger than 64x64");
  if (plan.events.size() > 256)
    throw std::invalid_argument("reference_frame: more than 256 events");

  const double pref = params.q0 / (4.0 * std::numbers::pi * params.d);
  const double ds = params.d_s();
  const double coincidence = kCoincidenceFraction * params.r_s;

  FieldFrame frame;
  frame.timestamp = t;
  frame.values = Eigen::ArrayXXd::Zero(grid.height, grid.width);
  for (const ProbeEvent& e : plan.events) {
    if (e.start <= t) ++frame.events_active;
  }
  for (int v = 0; v < grid.height; ++v) {
    for (int u = 0; u < grid.width; ++u) {
      const Eigen::Vector2d r = grid.pixel_center(u, v);
      double sum = 0.0;
      for (const ProbeEvent& e : plan.events) {
        if (e.start > t) continue;
        const double delta = t - e.start;
        const double tail = delta - e.dwell;
        if ((r - e.position).norm() <= coincidence) {
          if (delta <= e.dwell) {
            sum += pref * std::log((ds + 2.0 * params.d * delta) / ds);
          } else {
            sum += pref * std::log((ds + 2.0 * params.d * delta) /
                                   (ds + 2.0 * params.d * tail));
          }
          continue;
        }
        const double rho2 = (r - e.position).squaredNorm();
        const double arg_now = rho2 / (2.0 * ds + 4.0 * params.d * delta);
        if (delta <= e.dwell) {
          sum += pref * ref_e1_difference(arg_now, rho2 / (2.0 * ds));
        } else {
          sum += pref * ref_e1_difference(
                            arg_now, rho2 / (2.0 * ds + 4.0 * params.d * tail));
        }
      }
      frame.values(v, u) = sum;
    }
  }
  return frame;
}

}  // namespace stemdiff::verification
