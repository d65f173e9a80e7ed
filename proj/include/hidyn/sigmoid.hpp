#pragma once

// Sigmoid switching profiles: smooth stand-ins for sign(h) with a width
// parameter eps, plus evaluators for their asymptotic tail errors.  These
// drive the regularized reference integrators and the tail-accuracy checks.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace hidyn {

enum class SigmoidKind {
  Tanh,
  Arctan,
  Hill,
  AlgebraicSqrt,
  NonAnalyticBump,
};

inline const char* to_string(SigmoidKind k) {
  switch (k) {
    case SigmoidKind::Tanh: return "tanh";
    case SigmoidKind::Arctan: return "arctan";
    case SigmoidKind::Hill: return "hill";
    case SigmoidKind::AlgebraicSqrt: return "alg";
    case SigmoidKind::NonAnalyticBump: return "bump";
  }
  return "?";
}

inline std::optional<SigmoidKind> sigmoid_kind_from_name(const std::string& name) {
  if (name == "tanh") return SigmoidKind::Tanh;
  if (name == "arctan") return SigmoidKind::Arctan;
  if (name == "hill") return SigmoidKind::Hill;
  if (name == "alg") return SigmoidKind::AlgebraicSqrt;
  if (name == "bump") return SigmoidKind::NonAnalyticBump;
  return std::nullopt;
}

// theta is the Hill half-saturation constant.  It cancels identically in the
// centered form (see sigmoid_eval), so it only documents the model family.
struct Sigmoid {
  SigmoidKind kind = SigmoidKind::Tanh;
  double eps = 1e-3;
  double theta = 1.0;
};

namespace detail {

// y = r(-h)^r(h) - r(h)^r(-h) on |h| < eps with r(h) = exp(2 eps / (h - eps)),
// glued to sign(h) outside.  The exponents vanish fast enough at the edges
// that the pieces join with all derivatives flat.
inline double bump_eval(double h, double eps) {
  if (h >= eps) return 1.0;
  if (h <= -eps) return -1.0;
  double rp = std::exp(2.0 * eps / (h - eps));
  double rm = std::exp(2.0 * eps / (-h - eps));
  return std::pow(rm, rp) - std::pow(rp, rm);
}

}  // namespace detail

inline double sigmoid_eval(const Sigmoid& s, double h) {
  double a = h / s.eps;
  switch (s.kind) {
    case SigmoidKind::Tanh:
      return std::tanh(a);
    case SigmoidKind::Arctan:
      return (2.0 / 3.14159265358979323846) * std::atan(a);
    case SigmoidKind::Hill: {
      // 2 z^r / (z^r + theta^r) - 1 with z = theta e^h and r = 1/eps reduces
      // exactly to tanh(h / 2 eps): the theta^r factors cancel and only
      // e^{h/eps} survives.  The reduced form avoids overflow in z^r.
      return std::tanh(0.5 * a);
    }
    case SigmoidKind::AlgebraicSqrt:
      // a / sqrt(1 + a^2); hypot keeps the large-|a| regime from overflowing,
      // and h/eps itself may overflow to infinity for representable inputs.
      if (std::isinf(a)) return a > 0 ? 1.0 : -1.0;
      return a == 0.0 ? 0.0 : a / std::hypot(1.0, a);
    case SigmoidKind::NonAnalyticBump:
      return detail::bump_eval(h, s.eps);
  }
  return 0.0;
}

struct TailError {
  double predicted = 0.0;
  double actual = 0.0;
};

// Leading-order tail term of sigmoid_eval - sign(h), valid outside the layer.
inline TailError tail_error(const Sigmoid& s, double h) {
  if (std::abs(h) <= s.eps)
    throw std::domain_error("tail_error: |h| must exceed eps");
  double sign = h > 0 ? 1.0 : -1.0;
  double a = std::abs(h) / s.eps;
  TailError out;
  out.actual = sigmoid_eval(s, h) - sign;
  switch (s.kind) {
    case SigmoidKind::Tanh:
      out.predicted = -sign * 2.0 * std::exp(-2.0 * a);
      break;
    case SigmoidKind::Arctan:
      out.predicted = -sign * (2.0 / 3.14159265358979323846) / a;
      break;
    case SigmoidKind::Hill:
      out.predicted = -sign * 2.0 * std::exp(-a);
      break;
    case SigmoidKind::AlgebraicSqrt:
      out.predicted = -sign * 0.5 / (a * a);
      break;
    case SigmoidKind::NonAnalyticBump:
      out.predicted = 0.0;  // exact outside the support
      break;
  }
  return out;
}

}  // namespace hidyn
