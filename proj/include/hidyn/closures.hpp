#pragma once

// Closed-form closure models of an abrupt switch: the bistable relaxation
// ODE, the heat-balance steady state, and the truncated Gaussian oscillatory
// integral with its switch asymptote.  Each exposes the defining equation's
// solution so tests can verify it by independent residuals.

#include <cmath>
#include <stdexcept>
#include <utility>

#include "hidyn/system.hpp"

namespace hidyn {

namespace detail {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoOverSqrtPi = 1.1283791670955126;

inline double erf_series(double z) {
  // Maclaurin sum: erf z = (2/sqrt pi) sum_n (-1)^n z^{2n+1} / (n! (2n+1))
  double z2 = z * z;
  double u = z;
  double sum = 0.0;
  for (int n = 0; n < 200; ++n) {
    double t = u / (2 * n + 1);
    sum += t;
    if (std::abs(t) < 1e-18 * std::abs(sum)) break;
    u *= -z2 / (n + 1);
  }
  return kTwoOverSqrtPi * sum;
}

inline double erfc_fraction(double z) {
  // sqrt(pi) e^{z^2} erfc z = 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
  // evaluated by the modified Lentz method; valid for z >= 2.
  const double tiny = 1e-300;
  double f = tiny, c = tiny, d = 0.0;
  for (int j = 1; j <= 300; ++j) {
    double aj = j == 1 ? 1.0 : 0.5 * (j - 1);
    d = z + aj * d;
    if (d == 0.0) d = tiny;
    c = z + aj / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-17) break;
  }
  return std::exp(-z * z) / 1.7724538509055159 * f;
}

}  // namespace detail

inline double complementary_error_function(double z);

inline double error_function(double z) {
  double az = std::abs(z);
  if (az <= 2.0) return detail::erf_series(z);
  double v = 1.0 - complementary_error_function(az);
  return z < 0 ? -v : v;
}

inline double complementary_error_function(double z) {
  if (z < -2.0) return 2.0 - complementary_error_function(-z);
  if (z <= 2.0) return 1.0 - detail::erf_series(z);
  return detail::erfc_fraction(z);
}

struct RelaxationSteadyState {
  double y_star = 0.0;
  double dydot_dy = 0.0;
  bool symmetric_limit = false;  // set when h = 0, where y* degenerates to 0
};

// Attracting stationary state of eps ydot = (1 - y^2) h - eps y.  Writing
// M = eps/2h, the attractor -M + sign(h) sqrt(1 + M^2) is evaluated as
// sign(h) / (sqrt(1 + M^2) + |M|) to avoid cancellation for small h.
inline RelaxationSteadyState relaxation_steady_state(double eps, double h) {
  if (!(eps > 0.0)) throw ValidationError("eps must be positive");
  if (h == 0.0) return {0.0, -1.0, true};
  double m = eps / (2.0 * h);
  double y = (h > 0 ? 1.0 : -1.0) / (std::hypot(1.0, m) + std::abs(m));
  return {y, -std::hypot(1.0, 2.0 * h / eps), false};
}

// Transient of the same ODE with x held fixed:
//   y(t) = -M + alpha tanh(alpha t h / eps + k0),  alpha = sqrt(1 + M^2),
//   k0 = arctanh((M + y0) / alpha).
// Initial states outside (-M - alpha, -M + alpha) are not on this branch.
inline double relaxation_transient(double eps, double h, double y0, double t) {
  if (!(eps > 0.0)) throw ValidationError("eps must be positive");
  if (h == 0.0) return y0 * std::exp(-t);  // eps ydot = -eps y
  double m = eps / (2.0 * h);
  double alpha = std::hypot(1.0, m);
  double arg = (m + y0) / alpha;
  if (std::abs(arg) > 1.0)
    throw std::domain_error("relaxation_transient: initial state outside the tanh branch");
  double k0 = std::atanh(arg);  // +-inf at the equilibria; tanh saturates below
  return -m + alpha * std::tanh(alpha * t * h / eps + k0);
}

// Steady switching profile of the heat balance h y_h + eps y_hh = 0 with
// asymptotes +-1, i.e. erf(h / sqrt(2 eps)) with slope sqrt(2/(pi eps)) at 0.
inline double heat_steady_state(double eps, double h) {
  if (!(eps > 0.0)) throw ValidationError("eps must be positive");
  return error_function(h / std::sqrt(2.0 * eps));
}

namespace detail {

template <typename F>
double simpson_rec(F& f, double a, double b, double fa, double fm, double fb, double whole,
                   double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson quadrature with Richardson correction, absolute tolerance.
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

struct StokesValue {
  double y = 0.0;     // sqrt(2/pi) integral of e^{-k^2/2} cos(rho k) up to h/eps
  double ybar = 0.0;  // normalized: e^{rho^2/2} y - 1, a sigmoid in h
};

// Truncated Gaussian-cosine integral.  The envelope makes everything beyond
// |k| = 12 smaller than 2e-32, far below the quadrature tolerance, so the
// nominal truncation L = max(10, |h/eps| + 10) is clamped to that window.
inline StokesValue stokes_integral(double eps, double rho, double h, double tol = 1e-10) {
  if (!(eps > 0.0)) throw ValidationError("eps must be positive");
  if (!(rho >= 0.0)) throw ValidationError("rho must be non-negative");
  double a = h / eps;
  double hi = std::min(a, 12.0);
  double lo = -12.0;
  double y = 0.0;
  if (hi > lo) {
    auto f = [rho](double k) { return std::exp(-0.5 * k * k) * std::cos(rho * k); };
    y = std::sqrt(2.0 / detail::kPi) * adaptive_simpson(f, lo, hi, tol);
  }
  return {y, std::exp(0.5 * rho * rho) * y - 1.0};
}

// Two-term large-|h/eps| asymptote of the integral above: the stationary
// contribution e^{-rho^2/2} (1 + sign h) switches on across h = 0, plus the
// endpoint term -sqrt(2/pi) e^{-a^2/2} cos(rho a)/a.
inline double stokes_switch_asymptote(double eps, double rho, double h) {
  if (!(eps > 0.0)) throw ValidationError("eps must be positive");
  if (h == 0.0) throw std::domain_error("stokes_switch_asymptote: h must be nonzero");
  double a = h / eps;
  double stationary = std::exp(-0.5 * rho * rho) * (1.0 + (h > 0 ? 1.0 : -1.0));
  double endpoint = std::sqrt(2.0 / detail::kPi) * std::exp(-0.5 * a * a) * std::cos(rho * a) / a;
  return stationary - endpoint;
}

enum class ClosureKind { RelaxationODE, HeatSteadyState, GaussianStokes };

struct ClosureModel {
  ClosureKind kind = ClosureKind::RelaxationODE;
  double eps = 1e-3;
  double rho = 0.0;  // GaussianStokes only
};

// The model's normalized switching profile: a sigmoid-like function of h that
// tends to sign(h) as eps -> 0.
inline double closure_profile(const ClosureModel& model, double h) {
  switch (model.kind) {
    case ClosureKind::RelaxationODE: return relaxation_steady_state(model.eps, h).y_star;
    case ClosureKind::HeatSteadyState: return heat_steady_state(model.eps, h);
    case ClosureKind::GaussianStokes: return stokes_integral(model.eps, model.rho, h).ybar;
  }
  return 0.0;
}

}  // namespace hidyn
