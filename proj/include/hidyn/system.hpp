#pragma once
// Piecewise-smooth system definition.
//
// A system is n ODE right-hand sides together with a scalar surface
// function h(x).  The multiplier lam stands in for the discontinuity:
// off the surface lam is frozen at sign(h); on the surface it ranges
// over [-1, 1].  Two storage forms:
//
//   combined:  f_i(x, t, lam) given directly, polynomial in lam or not
//   split:     f = (1+lam)/2 f+  +  (1-lam)/2 f-  +  (lam^2 - 1) g
//
// The split form makes the classical two-sided fields explicit; g is the
// part that vanishes at lam = +-1 and is invisible off the surface.
// decompose() converts a lam-polynomial combined form into the split one
// by dividing each component by (lam^2 - 1).

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hidyn/expr.hpp"

namespace hidyn {

class ValidationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CombinedForm {
  std::vector<Expr> f;
};

struct SplitForm {
  std::vector<Expr> fplus;
  std::vector<Expr> fminus;
  std::vector<Expr> g;
};

struct SwitchedSystem {
  int n = 0;
  Expr h;
  std::variant<CombinedForm, SplitForm> form;

  static SwitchedSystem combined(int n, Expr h, std::vector<Expr> f);
  static SwitchedSystem split(int n, Expr h, std::vector<Expr> fplus,
                              std::vector<Expr> fminus, std::vector<Expr> g);

  bool is_split() const { return std::holds_alternative<SplitForm>(form); }

  // dx/dt at the given state, time, and multiplier value.
  void assemble_into(std::span<double> out, const Bindings& b) const;
  std::vector<double> assemble(const Bindings& b) const {
    std::vector<double> out(n);
    assemble_into(out, b);
    return out;
  }

  double surface_value(std::span<const double> x) const {
    return h.eval({x, 0.0, 0.0});
  }

  void surface_gradient_into(std::span<double> out, std::span<const double> x) const {
    Bindings b{x, 0.0, 0.0};
    for (int i = 0; i < n; ++i) out[i] = h.deriv(b, VarRef::state(i));
  }

  // Normal velocity f . grad h; its zeros in lam are the sliding states.
  double normal_component(const Bindings& b) const;

  // Partial of the normal velocity in lam (exact, via duals).
  double normal_component_dlam(const Bindings& b) const;

  // Partial of the normal velocity in t at fixed x, lam.
  double normal_component_dt(const Bindings& b) const;

  // Spatial gradient of the normal velocity at fixed t, lam.  The field
  // Jacobian part is exact; the surface-curvature part is differenced,
  // which is exact whenever h is linear.
  void normal_component_grad_x(std::span<double> out, const Bindings& b) const;

  // Absolute tolerance for treating h(x) as zero near this state.
  double surface_tolerance(std::span<const double> x) const {
    double s = 0.0;
    for (double xi : x) s += xi * xi;
    return 1e-9 * (1.0 + std::sqrt(s));
  }

 private:
  void validate() const;
  double component(int i, const Bindings& b) const;
  double component_dlam(int i, const Bindings& b) const;
  double component_dt(int i, const Bindings& b) const;
  double component_dx(int i, int j, const Bindings& b) const;
};

// ---------------------------------------------------------------------------

inline SwitchedSystem SwitchedSystem::combined(int n, Expr h, std::vector<Expr> f) {
  SwitchedSystem s;
  s.n = n;
  s.h = std::move(h);
  s.form = CombinedForm{std::move(f)};
  s.validate();
  return s;
}

inline SwitchedSystem SwitchedSystem::split(int n, Expr h, std::vector<Expr> fplus,
                                            std::vector<Expr> fminus, std::vector<Expr> g) {
  SwitchedSystem s;
  s.n = n;
  s.h = std::move(h);
  s.form = SplitForm{std::move(fplus), std::move(fminus), std::move(g)};
  s.validate();
  return s;
}

inline void SwitchedSystem::validate() const {
  if (n <= 0) throw ValidationError("state dimension must be positive");
  if (h.depends_on(VarRef::time()))
    throw ValidationError("h must not depend on t");
  if (h.depends_on(VarRef::lambda()))
    throw ValidationError("h must not depend on lam");
  auto check_list = [&](const std::vector<Expr>& v, const char* what) {
    if (static_cast<int>(v.size()) != n)
      throw ValidationError(std::string(what) + " needs exactly " + std::to_string(n) +
                            " components, got " + std::to_string(v.size()));
  };
  if (const auto* c = std::get_if<CombinedForm>(&form)) {
    check_list(c->f, "f");
    for (int i = 0; i < n; ++i)
      if (!c->f[i].smooth_in(VarRef::lambda()))
        throw ValidationError("f" + std::to_string(i + 1) +
                              " must be smooth in lam (no abs/sign of lam)");
  } else {
    const auto& s = std::get<SplitForm>(form);
    check_list(s.fplus, "fplus");
    check_list(s.fminus, "fminus");
    check_list(s.g, "g");
    auto lam = VarRef::lambda();
    for (int i = 0; i < n; ++i) {
      if (s.fplus[i].depends_on(lam) || s.fminus[i].depends_on(lam))
        throw ValidationError("fplus/fminus must not depend on lam");
      if (!s.g[i].smooth_in(lam))
        throw ValidationError("g" + std::to_string(i + 1) +
                              " must be smooth in lam (no abs/sign of lam)");
    }
  }
}

inline double SwitchedSystem::component(int i, const Bindings& b) const {
  if (const auto* c = std::get_if<CombinedForm>(&form)) return c->f[i].eval(b);
  const auto& s = std::get<SplitForm>(form);
  double lam = b.lam;
  return 0.5 * (1.0 + lam) * s.fplus[i].eval(b) + 0.5 * (1.0 - lam) * s.fminus[i].eval(b) +
         (lam * lam - 1.0) * s.g[i].eval(b);
}

inline double SwitchedSystem::component_dlam(int i, const Bindings& b) const {
  if (const auto* c = std::get_if<CombinedForm>(&form))
    return c->f[i].deriv(b, VarRef::lambda());
  const auto& s = std::get<SplitForm>(form);
  return 0.5 * s.fplus[i].eval(b) - 0.5 * s.fminus[i].eval(b) +
         2.0 * b.lam * s.g[i].eval(b) +
         (b.lam * b.lam - 1.0) * s.g[i].deriv(b, VarRef::lambda());
}

inline double SwitchedSystem::component_dt(int i, const Bindings& b) const {
  if (const auto* c = std::get_if<CombinedForm>(&form))
    return c->f[i].deriv(b, VarRef::time());
  const auto& s = std::get<SplitForm>(form);
  double lam = b.lam;
  return 0.5 * (1.0 + lam) * s.fplus[i].deriv(b, VarRef::time()) +
         0.5 * (1.0 - lam) * s.fminus[i].deriv(b, VarRef::time()) +
         (lam * lam - 1.0) * s.g[i].deriv(b, VarRef::time());
}

inline double SwitchedSystem::component_dx(int i, int j, const Bindings& b) const {
  VarRef xj = VarRef::state(j);
  if (const auto* c = std::get_if<CombinedForm>(&form)) return c->f[i].deriv(b, xj);
  const auto& s = std::get<SplitForm>(form);
  double lam = b.lam;
  return 0.5 * (1.0 + lam) * s.fplus[i].deriv(b, xj) +
         0.5 * (1.0 - lam) * s.fminus[i].deriv(b, xj) +
         (lam * lam - 1.0) * s.g[i].deriv(b, xj);
}

inline void SwitchedSystem::assemble_into(std::span<double> out, const Bindings& b) const {
  for (int i = 0; i < n; ++i) out[i] = component(i, b);
}

inline double SwitchedSystem::normal_component(const Bindings& b) const {
  Bindings hx{b.x, 0.0, 0.0};
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double hi = h.deriv(hx, VarRef::state(i));
    if (hi != 0.0) acc += component(i, b) * hi;
  }
  return acc;
}

inline double SwitchedSystem::normal_component_dlam(const Bindings& b) const {
  Bindings hx{b.x, 0.0, 0.0};
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double hi = h.deriv(hx, VarRef::state(i));
    if (hi != 0.0) acc += component_dlam(i, b) * hi;
  }
  return acc;
}

inline double SwitchedSystem::normal_component_dt(const Bindings& b) const {
  Bindings hx{b.x, 0.0, 0.0};
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double hi = h.deriv(hx, VarRef::state(i));
    if (hi != 0.0) acc += component_dt(i, b) * hi;
  }
  return acc;
}

inline void SwitchedSystem::normal_component_grad_x(std::span<double> out,
                                                    const Bindings& b) const {
  Bindings hx{b.x, 0.0, 0.0};
  std::vector<double> grad_h(n), fval(n);
  for (int i = 0; i < n; ++i) {
    grad_h[i] = h.deriv(hx, VarRef::state(i));
    fval[i] = component(i, b);
  }
  std::vector<double> xs(b.x.begin(), b.x.end());
  for (int j = 0; j < n; ++j) {
    // Exact term: (J_f^T grad h)_j.
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      if (grad_h[i] != 0.0) acc += component_dx(i, j, b) * grad_h[i];
    // Curvature term: d(grad h)/dx_j . f, differenced on h's gradient only
    // (vanishes identically when h is linear).
    double delta = 1e-6 * (1.0 + std::abs(xs[j]));
    double saved = xs[j];
    xs[j] = saved + delta;
    Bindings bp{xs, 0.0, 0.0};
    double plus = 0.0, minus = 0.0;
    for (int i = 0; i < n; ++i) plus += h.deriv(bp, VarRef::state(i)) * fval[i];
    xs[j] = saved - delta;
    Bindings bm{xs, 0.0, 0.0};
    for (int i = 0; i < n; ++i) minus += h.deriv(bm, VarRef::state(i)) * fval[i];
    xs[j] = saved;
    acc += (plus - minus) / (2.0 * delta);
    out[j] = acc;
  }
}

// ---------------------------------------------------------------------------
// Hidden-term extraction.
//
// Each combined component, polynomial in lam with coefficients c_0..c_d,
// is divided by (lam^2 - 1) using synthetic division:
//
//   for k = d .. 2:   q_{k-2} += c_k;   c_{k-2} += c_k
//
// leaving remainder c_0 + c_1 lam.  Evaluating the remainder at lam = +-1
// recovers the two-sided fields, and the quotient is the hidden term:
//
//   fplus = c_0 + c_1,   fminus = c_0 - c_1,   g = sum_j q_j lam^j.

inline SplitForm decompose(const std::vector<Expr>& f) {
  SplitForm out;
  out.fplus.reserve(f.size());
  out.fminus.reserve(f.size());
  out.g.reserve(f.size());
  Expr lam = Expr::variable(VarRef::lambda(), 0);

  for (const Expr& fi : f) {
    std::vector<Expr> c = lambda_coefficients(fi);
    int d = static_cast<int>(c.size()) - 1;
    std::vector<Expr> q(d >= 2 ? d - 1 : 0, Expr::number(0.0));
    for (int k = d; k >= 2; --k) {
      q[k - 2] = expr_add(q[k - 2], c[k]);
      c[k - 2] = expr_add(c[k - 2], c[k]);
    }
    Expr c1 = c.size() > 1 ? c[1] : Expr::number(0.0);
    out.fplus.push_back(expr_add(c[0], c1));
    out.fminus.push_back(expr_sub(c[0], c1));

    Expr gi = Expr::number(0.0);
    bool empty = true;
    for (int j = 0; j < static_cast<int>(q.size()); ++j) {
      auto v = detail::literal_value(q[j]);
      if (v && *v == 0.0) continue;
      Expr term = j == 0 ? q[j] : expr_mul(q[j], expr_pow_int(lam, j));
      gi = empty ? term : expr_add(gi, term);
      empty = false;
    }
    out.g.push_back(gi);
  }
  return out;
}

}  // namespace hidyn
