#pragma once
// Switching-layer analysis at a fixed point of the surface.
//
// On h(x) = 0 the multiplier becomes a fast variable driven by the normal
// velocity F(lam) = f(x, t, lam) . grad h(x).  Everything here reduces to
// the scalar function F on [-1, 1]:
//
//   roots of F        sliding states (attracting iff dF/dlam < 0)
//   no root in path   the trajectory crosses to the other side
//   F identically 0   degenerate contact, no verdict
//
// Root finding scans a 257-point grid, brackets sign changes, and chases
// interior extrema (zeros of dF/dlam) inside cells whose endpoints agree
// in sign, so tangential double roots and close pairs are still found.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hidyn/system.hpp"

namespace hidyn {

enum class Stability { Attracting, Repelling, Degenerate };

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::Attracting: return "attracting";
    case Stability::Repelling: return "repelling";
    default: return "degenerate";
  }
}

struct SlidingRoot {
  double lam_star = 0.0;
  Stability stability = Stability::Degenerate;
  double df1_dlam = 0.0;
};

// Magnitude scale of the normal velocity over the layer; tolerances that
// classify "small F" are taken relative to this.
inline double layer_scale(const SwitchedSystem& sys, std::span<const double> x, double t) {
  constexpr int kGrid = 257;
  double m = 0.0;
  Bindings b{x, t, 0.0};
  for (int i = 0; i < kGrid; ++i) {
    b.lam = -1.0 + 2.0 * i / (kGrid - 1);
    m = std::max(m, std::abs(sys.normal_component(b)));
  }
  return 1.0 + m;
}

namespace detail {

struct LayerFn {
  const SwitchedSystem& sys;
  std::span<const double> x;
  double t;
  double f(double lam) const { return sys.normal_component({x, t, lam}); }
  double df(double lam) const { return sys.normal_component_dlam({x, t, lam}); }
};

// Bisection on fn over a strict sign-change bracket, to machine width.
template <class Fn>
double bisect_root(const Fn& fn, double a, double b, double fa) {
  for (int it = 0; it < 90 && b - a > 5e-17 * (1.0 + std::abs(a)); ++it) {
    double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    double fm = fn(m);
    if (fm == 0.0) return m;
    if ((fm > 0) == (fa > 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

// All sliding states at (x, t), sorted by lam.  An identically vanishing
// normal velocity yields an empty list (degenerate contact).
inline std::vector<SlidingRoot> find_sliding_roots(const SwitchedSystem& sys,
                                                   std::span<const double> x, double t) {
  constexpr int kGrid = 257;
  detail::LayerFn L{sys, x, t};

  double lam[kGrid], val[kGrid];
  double vmax = 0.0;
  for (int i = 0; i < kGrid; ++i) {
    lam[i] = -1.0 + 2.0 * i / (kGrid - 1);
    val[i] = L.f(lam[i]);
    vmax = std::max(vmax, std::abs(val[i]));
  }
  const double scale = 1.0 + vmax;
  const double root_tol = 1e-12 * scale;
  const double degen_tol = 1e-8 * scale;

  if (vmax == 0.0) return {};

  std::vector<double> found;
  auto fwrap = [&](double v) { return L.f(v); };

  for (int i = 0; i < kGrid; ++i)
    if (std::abs(val[i]) <= root_tol) found.push_back(lam[i]);

  for (int i = 0; i + 1 < kGrid; ++i) {
    double a = lam[i], b = lam[i + 1], fa = val[i], fb = val[i + 1];
    if (std::abs(fa) <= root_tol || std::abs(fb) <= root_tol) continue;
    if ((fa > 0) != (fb > 0)) {
      found.push_back(detail::bisect_root(fwrap, a, b, fa));
      continue;
    }
    // Same sign: look for an interior extremum of F.
    double da = L.df(a), db = L.df(b);
    if (da == 0.0 || db == 0.0 || (da > 0) == (db > 0)) continue;
    double m = detail::bisect_root([&](double v) { return L.df(v); }, a, b, da);
    double fm = L.f(m);
    if (std::abs(fm) <= root_tol) {
      found.push_back(m);  // tangential contact
    } else if ((fm > 0) != (fa > 0)) {
      found.push_back(detail::bisect_root(fwrap, a, m, fa));
      found.push_back(detail::bisect_root(fwrap, m, b, fm));
    }
  }

  std::sort(found.begin(), found.end());
  std::vector<SlidingRoot> roots;
  for (double r : found) {
    if (!roots.empty() && r - roots.back().lam_star < 1e-9) continue;
    double d = L.df(r);
    Stability st = std::abs(d) <= degen_tol
                       ? Stability::Degenerate
                       : (d < 0 ? Stability::Attracting : Stability::Repelling);
    roots.push_back({r, st, d});
  }
  return roots;
}

// Sliding state of the classical convex combination (hidden term ignored).
// Exists iff the two one-sided normal velocities disagree in sign.
inline std::optional<SlidingRoot> filippov_root(const SwitchedSystem& sys,
                                                std::span<const double> x, double t) {
  double fp = sys.normal_component({x, t, 1.0});
  double fm = sys.normal_component({x, t, -1.0});
  if (!(fp * fm < 0.0)) return std::nullopt;
  SlidingRoot r;
  r.lam_star = (fp + fm) / (fm - fp);
  r.df1_dlam = 0.5 * (fp - fm);
  double scale = 1.0 + std::max(std::abs(fp), std::abs(fm));
  r.stability = std::abs(r.df1_dlam) <= 1e-8 * scale
                    ? Stability::Degenerate
                    : (r.df1_dlam < 0 ? Stability::Attracting : Stability::Repelling);
  return r;
}

// ---------------------------------------------------------------------------
// Passage decisions

enum class PassageKind { Crossing, Sliding, Degenerate };

inline const char* to_string(PassageKind k) {
  switch (k) {
    case PassageKind::Crossing: return "crossing";
    case PassageKind::Sliding: return "sliding";
    default: return "degenerate";
  }
}

struct PassageDecision {
  PassageKind kind = PassageKind::Degenerate;
  int exit_side = 0;  // sign of h after a crossing; 0 otherwise
  std::optional<SlidingRoot> root;
};

namespace detail {

// Shared tail: from lam0 the multiplier moves in direction dir; capture at
// the first root ahead, otherwise run out at the matching boundary.
inline PassageDecision trace_layer(const SwitchedSystem& sys, std::span<const double> x,
                                   double t, double lam0, int dir, double scale) {
  auto roots = find_sliding_roots(sys, x, t);
  const SlidingRoot* hit = nullptr;
  if (dir < 0) {
    for (auto it = roots.rbegin(); it != roots.rend(); ++it)
      if (it->lam_star < lam0 - 1e-9) {
        hit = &*it;
        break;
      }
  } else {
    for (const auto& r : roots)
      if (r.lam_star > lam0 + 1e-9) {
        hit = &r;
        break;
      }
  }
  if (!hit) return {PassageKind::Crossing, dir, std::nullopt};
  // A root reached by monotone fast flow cannot be strictly repelling from
  // the approach side; a repelling or flat classification means the contact
  // is tangential, which we refuse to resolve.
  if (hit->stability != Stability::Attracting)
    return {PassageKind::Degenerate, 0, *hit};
  return {PassageKind::Sliding, 0, *hit};
}

}  // namespace detail

// Verdict for a trajectory striking the surface from sign(h) = entry_side.
// Precondition: the strike is transversal on the entry side, i.e. the
// normal velocity at lam = entry_side points toward the surface.
inline PassageDecision decide_passage(const SwitchedSystem& sys, std::span<const double> x,
                                      double t, int entry_side) {
  if (entry_side != 1 && entry_side != -1)
    throw std::logic_error("entry_side must be +1 or -1");
  double scale = layer_scale(sys, x, t);
  double f_entry = sys.normal_component({x, t, static_cast<double>(entry_side)});
  if (std::abs(f_entry) <= 1e-11 * scale)
    return {PassageKind::Degenerate, 0, std::nullopt};
  if (f_entry * entry_side > 0.0)
    throw std::logic_error("decide_passage: flow leaves the surface on the entry side");
  return detail::trace_layer(sys, x, t, static_cast<double>(entry_side), -entry_side, scale);
}

// Verdict when the multiplier is released mid-layer (after a fold): the
// fast flow resumes from lam_start in the direction the normal velocity
// pushes it.
//
// At the release point F(lam_start) is often still ~0 (the stop happens on
// a root that is about to fold away, possibly with its repelling partner
// still nearby).  Probing F at lam_start +- delta reads the escape
// direction off the local shape and starts the trace outside any residual
// root pair.
inline PassageDecision decide_from_layer(const SwitchedSystem& sys, std::span<const double> x,
                                         double t, double lam_start) {
  double scale = layer_scale(sys, x, t);
  double tol = 1e-11 * scale;
  Bindings b{x, t, lam_start};
  double f0 = sys.normal_component(b);
  // Released genuinely off any root: the sign of F is trustworthy.  The
  // threshold sits well above the root solver's residual (1e-10 scale) so
  // leftover Newton noise at a fold stop cannot masquerade as direction.
  if (std::abs(f0) > 1e-9 * scale) {
    int dir = f0 > 0 ? 1 : -1;
    return detail::trace_layer(sys, x, t, lam_start, dir, scale);
  }
  // On or next to a root.  Probe beyond the residual root pair of a fold:
  // its half-width is |F_lam| / |F_lamlam| at the stop point.
  double delta = 1e-3;
  {
    const double e = 1e-4;
    b.lam = std::min(lam_start + e, 1.0);
    double dp = sys.normal_component_dlam(b);
    b.lam = std::max(lam_start - e, -1.0);
    double dm = sys.normal_component_dlam(b);
    b.lam = lam_start;
    double fll = (dp - dm) / (std::min(lam_start + e, 1.0) - std::max(lam_start - e, -1.0));
    double fl = sys.normal_component_dlam(b);
    if (std::abs(fll) > 1e-6 * scale)
      delta = std::min(0.1, std::max(delta, 4.0 * std::abs(fl / fll)));
  }
  double lp = std::min(lam_start + delta, 1.0);
  double lm = std::max(lam_start - delta, -1.0);
  b.lam = lp;
  double fp = sys.normal_component(b);
  b.lam = lm;
  double fm = sys.normal_component(b);
  if (fp > tol && fm > tol) return detail::trace_layer(sys, x, t, lp, 1, scale);
  if (fp < -tol && fm < -tol) return detail::trace_layer(sys, x, t, lm, -1, scale);
  if (fm > tol && fp < -tol) return detail::trace_layer(sys, x, t, lm, 1, scale);
  // fm < 0 < fp (locally repelling) or a flat stretch: no usable verdict.
  return {PassageKind::Degenerate, 0, std::nullopt};
}

// ---------------------------------------------------------------------------
// Motion along the surface while sliding

// Tangential velocity at a sliding state: the assembled field minus its
// normal component.  The projection only cleans up roundoff, since the
// normal velocity vanishes at the root by construction; a visibly nonzero
// residual means the caller's root is stale for this (x, t).
inline std::vector<double> sliding_field(const SwitchedSystem& sys, std::span<const double> x,
                                         double t, const SlidingRoot& root) {
  Bindings b{x, t, root.lam_star};
  double f1 = sys.normal_component(b);
  double scale = layer_scale(sys, x, t);
  if (std::abs(f1) > 1e-8 * scale)
    throw std::logic_error("sliding_field: root is stale at this point");
  int n = sys.n;
  std::vector<double> v(n), gh(n);
  sys.assemble_into(v, b);
  sys.surface_gradient_into(gh, x);
  double gg = 0.0;
  for (int i = 0; i < n; ++i) gg += gh[i] * gh[i];
  if (gg == 0.0) throw NumericalError("sliding_field: grad h vanishes on the surface");
  double c = f1 / gg;
  for (int i = 0; i < n; ++i) v[i] -= c * gh[i];
  return v;
}

struct SlidingDrift {
  double dlam_dt = 0.0;   // motion of the sliding state along the surface
  bool near_fold = false; // dF/dlam within fold_tol_rel of zero
  int boundary_exit = 0;  // +-1 when lam* sits at that edge and drifts out
};

// Time derivative of the sliding state lam*(t) transported by the sliding
// flow: dlam*/dt = -(F_t + grad_x F . v) / F_lam.
inline SlidingDrift sliding_drift(const SwitchedSystem& sys, std::span<const double> x,
                                  double t, const SlidingRoot& root,
                                  double fold_tol_rel = 1e-3) {
  double scale = layer_scale(sys, x, t);
  double degen_tol = 1e-8 * scale;
  Bindings b{x, t, root.lam_star};
  double flam = sys.normal_component_dlam(b);
  if (std::abs(flam) <= degen_tol)
    throw NumericalError("sliding_drift: layer equation is degenerate at the root");
  auto v = sliding_field(sys, x, t, root);
  int n = sys.n;
  std::vector<double> gfx(n);
  sys.normal_component_grad_x(gfx, b);
  double adv = sys.normal_component_dt(b);
  for (int i = 0; i < n; ++i) adv += gfx[i] * v[i];
  SlidingDrift out;
  out.dlam_dt = -adv / flam;
  out.near_fold = std::abs(flam) <= fold_tol_rel * scale;
  if (root.lam_star >= 1.0 - 1e-9 && out.dlam_dt > 0) out.boundary_exit = 1;
  if (root.lam_star <= -1.0 + 1e-9 && out.dlam_dt < 0) out.boundary_exit = -1;
  return out;
}

}  // namespace hidyn
