#pragma once

// Reference integrators that resolve the switch by brute force instead of
// event handling: fixed-step Euler with a sigmoid profile standing in for
// sign(h), its Euler-Maruyama variant with additive noise, plus helpers for
// measuring layer transits and Monte Carlo washout of sliding.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hidyn/expr.hpp"
#include "hidyn/layer.hpp"
#include "hidyn/sigmoid.hpp"
#include "hidyn/system.hpp"
#include "hidyn/trajectory.hpp"

namespace hidyn {

struct NoiseConfig {
  double kappa = 0.0;  // per-component diffusion amplitude
  std::uint64_t seed = 1;
  double substep = 1e-4;
};

// Deterministic Gaussian stream: mt19937_64 bits mapped to (0,1] uniforms,
// paired through Box-Muller.  std::normal_distribution is not pinned down by
// the standard, so reproducibility across toolchains needs this by hand.
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {  // in (0,1], never 0, so log() below is safe
    return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
  }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double r = std::sqrt(-2.0 * std::log(uniform()));
    double a = 2.0 * 3.14159265358979323846 * uniform();
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

namespace detail {

inline Mode smooth_mode(double h, double eps) {
  if (std::abs(h) <= eps) return Mode::InLayerTransit;
  return h > 0 ? Mode::FreePlus : Mode::FreeMinus;
}

// Shared fixed-step driver.  The noise branch is skipped entirely for
// kappa = 0, which makes the deterministic run bit-identical whether it was
// requested through smooth_simulate or stochastic_simulate.
inline Trajectory euler_drive(const SwitchedSystem& sys, std::span<const double> x0, double t0,
                              double t1, const Sigmoid& s, double step, long stride, double kappa,
                              std::uint64_t seed) {
  if (!(step > 0.0)) throw ValidationError("time step must be positive");
  if (!(t1 >= t0)) throw ValidationError("time span must not run backwards");
  const int n = sys.n;
  if (static_cast<int>(x0.size()) != n)
    throw ValidationError("initial state has wrong dimension");

  auto nfull = static_cast<long long>(std::floor((t1 - t0) / step + 1e-9));
  double t_tail = t0 + static_cast<double>(nfull) * step;
  bool tail = t_tail < t1 - 1e-12 * (1.0 + std::abs(t1));
  long long total = nfull + (tail ? 1 : 0);
  if (stride <= 0) stride = static_cast<long>(std::max(1LL, (total + 999999) / 1000000));

  Trajectory traj(n);
  traj.reserve(static_cast<std::size_t>(total / stride + 2));
  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> dx(static_cast<std::size_t>(n));
  GaussianRng rng(seed);

  for (long long k = 0; k < total; ++k) {
    double t = t0 + static_cast<double>(k) * step;
    double dt = k < nfull ? step : t1 - t;
    double h = sys.surface_value(x);
    double lam = sigmoid_eval(s, h);
    if (k % stride == 0) traj.push(t, x, lam, smooth_mode(h, s.eps));
    sys.assemble_into(dx, Bindings{x, t, lam});
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] += dt * dx[static_cast<std::size_t>(i)];
    if (kappa > 0.0) {
      double sdt = kappa * std::sqrt(dt);
      for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] += sdt * rng.gaussian();
    }
    for (int i = 0; i < n; ++i)
      if (!std::isfinite(x[static_cast<std::size_t>(i)]))
        throw NumericalError("state diverged at t = " + format_double(t + dt));
  }
  double hf = sys.surface_value(x);
  traj.push(t1, x, sigmoid_eval(s, hf), smooth_mode(hf, s.eps));
  return traj;
}

}  // namespace detail

// Fixed-step explicit Euler with lam = sigmoid(h(x)).  stride <= 0 picks a
// decimation that caps the output near one million samples.
inline Trajectory smooth_simulate(const SwitchedSystem& sys, std::span<const double> x0, double t0,
                                  double t1, const Sigmoid& s, double step, long stride = 0) {
  return detail::euler_drive(sys, x0, t0, t1, s, step, stride, 0.0, 0);
}

// Euler-Maruyama: the smooth drift plus independent per-component Gaussian
// increments of standard deviation kappa * sqrt(substep).
inline Trajectory stochastic_simulate(const SwitchedSystem& sys, std::span<const double> x0,
                                      double t0, double t1, const Sigmoid& s,
                                      const NoiseConfig& noise, long stride = 0) {
  if (noise.kappa < 0.0) throw ValidationError("noise amplitude must be non-negative");
  return detail::euler_drive(sys, x0, t0, t1, s, noise.substep, stride, noise.kappa, noise.seed);
}

struct TransitPoint {
  double delta_t = 0.0;
  double lam = 0.0;
};

// The (elapsed time, lambda) curve of the k-th maximal run of consecutive
// samples labeled InLayerTransit (0-based).
inline std::vector<TransitPoint> layer_transit_profile(const Trajectory& traj, int crossing_index) {
  int found = -1;
  for (std::size_t i = 0; i < traj.size();) {
    if (traj.mode(i) != Mode::InLayerTransit) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < traj.size() && traj.mode(j) == Mode::InLayerTransit) ++j;
    if (++found == crossing_index) {
      std::vector<TransitPoint> out;
      out.reserve(j - i);
      for (std::size_t k = i; k < j; ++k) out.push_back({traj.t(k) - traj.t(i), traj.lam(k)});
      return out;
    }
    i = j;
  }
  throw std::out_of_range("layer_transit_profile: transit " + std::to_string(crossing_index) +
                          " not found (" + std::to_string(found + 1) + " transits)");
}

// A run "sticks" if it dwells in the band |h| < 5 eps for longer than
// 100 eps without interruption.
inline bool trajectory_sticks(const SwitchedSystem& sys, const Trajectory& traj, double eps) {
  double band = 5.0 * eps;
  double need = 100.0 * eps;
  bool in = false;
  double t_start = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (std::abs(sys.surface_value(traj.x(i))) < band) {
      if (!in) {
        in = true;
        t_start = traj.t(i);
      }
      if (traj.t(i) - t_start > need) return true;
    } else {
      in = false;
    }
  }
  return false;
}

struct WashoutPoint {
  double kappa = 0.0;
  double stick_fraction = 0.0;
};

// Noise amplitude at which sticking and crossing compete, for reporting
// alongside washout sweeps.
inline double washout_reference_scale(double eps) { return std::sqrt(-eps / std::log(eps)); }

// Monte Carlo stick fraction versus noise amplitude.  Run i uses seed
// seed0 + i for every kappa (common random numbers), so the curve is smooth
// in kappa and reproducible.  Requires a system whose layer actually holds a
// nonlinear sliding attractor that the linear reduction lacks.
inline std::vector<WashoutPoint> washout_curve(const SwitchedSystem& sys,
                                               std::span<const double> x0, const Sigmoid& s,
                                               const std::vector<double>& kappas,
                                               int runs_per_kappa, double horizon,
                                               double substep = 1e-4, std::uint64_t seed0 = 1) {
  if (runs_per_kappa <= 0) throw ValidationError("runs per kappa must be positive");
  // project the probe point onto the surface before interrogating the layer
  std::vector<double> xs(x0.begin(), x0.end());
  std::vector<double> gh(xs.size());
  for (int it = 0; it < 8; ++it) {
    double h = sys.surface_value(xs);
    if (std::abs(h) <= sys.surface_tolerance(xs)) break;
    sys.surface_gradient_into(gh, xs);
    double g2 = 0.0;
    for (double v : gh) g2 += v * v;
    if (g2 == 0.0) throw NumericalError("surface gradient vanished while projecting");
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] -= h / g2 * gh[i];
  }
  auto roots = find_sliding_roots(sys, xs, 0.0);
  bool hidden = false;
  for (const auto& r : roots) hidden = hidden || r.stability == Stability::Attracting;
  if (!hidden || filippov_root(sys, xs, 0.0).has_value())
    throw ValidationError("washout_curve needs a hidden sliding attractor in the layer");

  std::vector<WashoutPoint> out;
  out.reserve(kappas.size());
  for (double kappa : kappas) {
    int sticks = 0;
    for (int i = 0; i < runs_per_kappa; ++i) {
      NoiseConfig noise{kappa, seed0 + static_cast<std::uint64_t>(i), substep};
      Trajectory traj = stochastic_simulate(sys, x0, 0.0, horizon, s, noise, 1);
      if (trajectory_sticks(sys, traj, s.eps)) ++sticks;
    }
    out.push_back({kappa, static_cast<double>(sticks) / runs_per_kappa});
  }
  return out;
}

}  // namespace hidyn
