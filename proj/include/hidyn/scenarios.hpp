#pragma once

// Built-in named systems: the worked examples this project is exercised on,
// each bundling the system definition, reference initial data, a layer probe
// point, and machine-checkable expected facts with their tolerances.

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hidyn/expr.hpp"
#include "hidyn/system.hpp"

namespace hidyn {

enum class FactKind {
  LayerRootCount,      // number of sliding roots at the probe point
  LayerRootLambda,     // lambda of the index-th root (sorted ascending)
  CaptureLambda,       // sliding root the reference trajectory captures onto
  CaptureDf1,          // dF/dlam at the captured root
  SlidingVelocityX2,   // dx2/dt while sliding
  PeakAbsX2,           // late-time oscillation peak of |x2|
  FilippovVariantDecay,  // |x2| bound at t1 for the g = 0 reduction
  SmoothStepAgreement,   // sup-distance bound between Euler step refinements
  SmoothStepDivergence,  // sup-distance lower bound between refinements
  PoincareContraction,   // consecutive period-4 section distance bound
  TransitLagRatio,       // nonlinear vs linear layer transit duration ratio
};

inline const char* to_string(FactKind k) {
  switch (k) {
    case FactKind::LayerRootCount: return "layer_root_count";
    case FactKind::LayerRootLambda: return "layer_root_lambda";
    case FactKind::CaptureLambda: return "capture_lambda";
    case FactKind::CaptureDf1: return "capture_df1";
    case FactKind::SlidingVelocityX2: return "sliding_velocity_x2";
    case FactKind::PeakAbsX2: return "peak_abs_x2";
    case FactKind::FilippovVariantDecay: return "filippov_variant_decay";
    case FactKind::SmoothStepAgreement: return "smooth_step_agreement";
    case FactKind::SmoothStepDivergence: return "smooth_step_divergence";
    case FactKind::PoincareContraction: return "poincare_contraction";
    case FactKind::TransitLagRatio: return "transit_lag_ratio";
  }
  return "?";
}

// Where an expected value comes from: a closed-form derivation that tests can
// recompute exactly, or an independent numerical reference computation.
enum class FactBasis { ClosedForm, NumericReference };

struct ExpectedFact {
  FactKind kind;
  double value = 0.0;
  double tol = 0.0;  // absolute; 0 means the value is itself a bound
  int index = 0;     // for per-root facts
  const char* note = "";
  FactBasis basis = FactBasis::ClosedForm;
};

struct Scenario {
  std::string name;
  std::string description;
  SwitchedSystem system;
  std::vector<double> x0;
  double t0 = 0.0;
  double t1 = 1.0;
  std::vector<double> layer_probe_x;  // state at which to interrogate the layer
  double layer_probe_t = 0.0;
  std::vector<ExpectedFact> expected;
};

namespace detail {

inline SwitchedSystem make_combined(int n, const char* h, std::vector<const char*> fs) {
  std::vector<Expr> f;
  f.reserve(fs.size());
  for (const char* s : fs) f.push_back(Expr::parse(s, n));
  return SwitchedSystem::combined(n, Expr::parse(h, n), std::move(f));
}

inline std::vector<Scenario> build_catalog() {
  std::vector<Scenario> list;
  const double inv_sqrt2 = 0.7071067811865476;
  const double vdp_peak = 2.7216552697590868;  // 20 / (3 sqrt 6), fold of the cubic layer field

  list.push_back({
      "example1a",
      "linear switch with classical sliding onto lam = 0",
      make_combined(2, "x1", {"-lam", "2*lam^2 - 1"}),
      {0.3, 0.0},
      0.0,
      5.0,
      {0.0, 0.0},
      0.0,
      {
          {FactKind::CaptureLambda, 0.0, 1e-10, 0, "root of -lam", FactBasis::ClosedForm},
          {FactKind::CaptureDf1, -1.0, 1e-6, 0, "d(-lam)/dlam", FactBasis::ClosedForm},
          {FactKind::SlidingVelocityX2, -1.0, 1e-8, 0, "2*0^2 - 1", FactBasis::ClosedForm},
      },
  });

  list.push_back({
      "example1b",
      "same layer field as example1a with reversed drift",
      make_combined(2, "x1", {"-lam", "1"}),
      {0.3, 0.0},
      0.0,
      5.0,
      {0.0, 0.0},
      0.0,
      {
          {FactKind::CaptureLambda, 0.0, 1e-10, 0, "root of -lam", FactBasis::ClosedForm},
          {FactKind::CaptureDf1, -1.0, 1e-6, 0, "d(-lam)/dlam", FactBasis::ClosedForm},
          {FactKind::SlidingVelocityX2, 1.0, 1e-8, 0, "constant drift", FactBasis::ClosedForm},
      },
  });

  list.push_back({
      "example2a",
      "hidden sliding: nonlinear layer term holds the surface where the "
      "linear reduction would cross",
      make_combined(2, "x1", {"2*lam^2 - 1", "-lam"}),
      {-0.5, 0.0},
      0.0,
      2.0,
      {0.0, 0.0},
      0.0,
      {
          {FactKind::LayerRootCount, 2.0, 0.0, 0, "roots of 2*lam^2 - 1", FactBasis::ClosedForm},
          {FactKind::LayerRootLambda, -inv_sqrt2, 1e-10, 0, "-1/sqrt(2), attracting",
           FactBasis::ClosedForm},
          {FactKind::LayerRootLambda, inv_sqrt2, 1e-10, 1, "+1/sqrt(2), repelling",
           FactBasis::ClosedForm},
          {FactKind::CaptureLambda, -inv_sqrt2, 1e-10, 0, "approach from x1 < 0",
           FactBasis::ClosedForm},
          {FactKind::CaptureDf1, -2.8284271247461903, 1e-6, 0, "4*lam at the capture root",
           FactBasis::ClosedForm},
          {FactKind::SlidingVelocityX2, inv_sqrt2, 1e-8, 0, "-lam at the capture root",
           FactBasis::ClosedForm},
      },
  });

  list.push_back({
      "example2b",
      "linear counterpart of example2a: pure crossing, no sliding roots",
      make_combined(2, "x1", {"1", "-lam"}),
      {-0.5, 0.0},
      0.0,
      2.0,
      {0.0, 0.0},
      0.0,
      {
          {FactKind::LayerRootCount, 0.0, 0.0, 0, "F = 1 has no zeros", FactBasis::ClosedForm},
      },
  });

  list.push_back({
      "hidden_vdp",
      "relaxation oscillation carried entirely by the switching layer: the "
      "cubic layer field folds at lam = +-1/sqrt(6)",
      make_combined(2, "x1", {"x2/10 + lam - 2*lam^3", "-lam"}),
      {1.0, 1.0},
      0.0,
      100.0,
      {0.0, 1.0},
      0.0,
      {
          {FactKind::PeakAbsX2, vdp_peak, 0.05 * vdp_peak, 0,
           "fold height 20/(3 sqrt 6) of the cubic slow manifold, peaks for t > 50",
           FactBasis::NumericReference},
          {FactKind::FilippovVariantDecay, 1e-3, 0.0, 0,
           "linear reduction slides with dx2/dt = -x2/10, so |x2(100)| < 1e-3",
           FactBasis::ClosedForm},
      },
  });

  list.push_back({
      "hidden_vdp_coupled",
      "hidden_vdp with a stiff follower tracking lam, beta = 1e-4",
      make_combined(3, "x1", {"x2/10 + lam - 2*lam^3", "-lam", "10000*(lam - x3)"}),
      {1.0, 1.0, 0.0},
      0.0,
      1.0,
      {0.0, 1.0, 0.0},
      0.0,
      {
          {FactKind::LayerRootCount, 3.0, 0.0, 0, "cubic 0.1 + lam - 2*lam^3 at x2 = 1",
           FactBasis::ClosedForm},
      },
  });

  list.push_back({
      "oscillator_linear",
      "forced oscillator whose forcing frequency switches at x1 = 0, blended "
      "linearly in lam",
      make_combined(2, "x1",
                    {"-0.01*x1 - x2 - ((1 + lam)/2*sin(3*pi*t/2) + (1 - lam)/2*sin(pi*t/2))",
                     "x1"}),
      {1.0, 0.0},
      0.0,
      200.0,
      {0.0, 0.5},
      0.0,
      {
          {FactKind::SmoothStepAgreement, 0.05, 0.0, 0,
           "Euler step 1e-4 vs 1e-5 stay together over t in [100, 200]",
           FactBasis::NumericReference},
          {FactKind::PoincareContraction, 1e-2, 0.0, 0,
           "period-4 section settles to a simple cycle", FactBasis::NumericReference},
      },
  });

  list.push_back({
      "oscillator_nonlinear",
      "same oscillator with the frequency itself blended in lam: layer "
      "transits acquire a sliding lag and the flow stays irregular",
      make_combined(2, "x1", {"-0.01*x1 - x2 - sin((1 + lam/2)*pi*t)", "x1"}),
      {1.0, 0.0},
      0.0,
      200.0,
      {0.0, 0.5},
      0.0,
      {
          {FactKind::SmoothStepDivergence, 0.5, 0.0, 0,
           "Euler step 1e-4 vs 1e-5 separate by order one",
           FactBasis::NumericReference},
          {FactKind::TransitLagRatio, 2.0, 0.0, 0,
           "layer transit near t = 2 takes at least twice the linear model's",
           FactBasis::NumericReference},
      },
  });

  return list;
}

}  // namespace detail

inline const std::vector<Scenario>& catalog() {
  static const std::vector<Scenario> list = detail::build_catalog();
  return list;
}

inline const Scenario& find_scenario(std::string_view name) {
  for (const Scenario& s : catalog())
    if (s.name == name) return s;
  std::string msg = "unknown scenario '";
  msg.append(name);
  msg += "'; available:";
  for (const Scenario& s : catalog()) {
    msg += ' ';
    msg += s.name;
  }
  throw std::out_of_range(msg);
}

inline const ExpectedFact* find_fact(const Scenario& s, FactKind kind, int index = 0) {
  for (const ExpectedFact& f : s.expected)
    if (f.kind == kind && f.index == index) return &f;
  return nullptr;
}

// The same scenario with the hidden term removed: combined forms are split by
// polynomial division and the quotient g is zeroed, split forms keep only
// fplus/fminus.  Scenarios whose g already vanishes come back unchanged.
inline Scenario filippov_variant(const Scenario& s) {
  SplitForm split;
  if (s.system.is_split()) {
    split = std::get<SplitForm>(s.system.form);
  } else {
    split = decompose(std::get<CombinedForm>(s.system.form).f);
  }
  bool trivial = true;
  for (const Expr& e : split.g) {
    auto v = detail::literal_value(e);
    trivial = trivial && v.has_value() && *v == 0.0;
  }
  if (trivial) return s;

  Scenario out = s;
  std::vector<Expr> zeros;
  zeros.reserve(split.g.size());
  for (std::size_t i = 0; i < split.g.size(); ++i) zeros.push_back(Expr::number(0.0));
  out.system = SwitchedSystem::split(s.system.n, s.system.h, std::move(split.fplus),
                                     std::move(split.fminus), std::move(zeros));
  out.name = s.name + "_filippov";
  out.description = s.description + " (hidden term removed)";
  out.expected.clear();
  return out;
}

}  // namespace hidyn
