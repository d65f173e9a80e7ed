#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hidyn/integrate.hpp"
#include "hidyn/regularize.hpp"

using namespace hidyn;

namespace {

SwitchedSystem decay1d() {
  return SwitchedSystem::combined(1, Expr::parse("x1", 1), {Expr::parse("-x1", 1)});
}

SwitchedSystem crossing1d() {
  return SwitchedSystem::combined(1, Expr::parse("x1", 1), {Expr::parse("1", 1)});
}

SwitchedSystem classical2d() {  // attracting classical sliding at lam = 0
  return SwitchedSystem::combined(
      2, Expr::parse("x1", 2),
      {Expr::parse("-lam", 2), Expr::parse("2*lam^2 - 1", 2)});
}

SwitchedSystem hidden2d() {  // hidden sliding at lam = -1/sqrt(2), crossing in the linear model
  return SwitchedSystem::combined(
      2, Expr::parse("x1", 2),
      {Expr::parse("2*lam^2 - 1", 2), Expr::parse("-lam", 2)});
}

SwitchedSystem noise1d() {
  return SwitchedSystem::combined(1, Expr::parse("x1", 1), {Expr::parse("0", 1)});
}

}  // namespace

TEST_CASE("gaussian stream is deterministic with unit moments") {
  GaussianRng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    double va = a.gaussian();
    all_equal = all_equal && (va == b.gaussian());
    any_diff = any_diff || (va != c.gaussian());
  }
  CHECK(all_equal);
  CHECK(any_diff);

  GaussianRng g(7);
  double sum = 0.0, sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double v = g.gaussian();
    sum += v;
    sq += v * v;
  }
  double mean = sum / n;
  double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(var == Catch::Approx(1.0).margin(0.03));

  GaussianRng u(11);
  for (int i = 0; i < 1000; ++i) {
    double v = u.uniform();
    REQUIRE(v > 0.0);
    REQUIRE(v <= 1.0);
  }
}

TEST_CASE("euler driver reproduces the hand-rolled recurrence exactly") {
  auto sys = decay1d();
  const double step = 1e-3;
  Sigmoid s{SigmoidKind::Tanh, 1e-3, 1.0};
  Trajectory tr = smooth_simulate(sys, std::vector<double>{1.0}, 0.0, 1.0, s, step, 1);

  REQUIRE(tr.size() == 1001);
  double x = 1.0;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    REQUIRE(tr.t(k) == 0.0 + static_cast<double>(k) * step);
    REQUIRE(tr.x(k)[0] == x);
    x += step * (-x);
  }
  CHECK(tr.t(1000) == 1.0);
  CHECK(tr.events().empty());
}

TEST_CASE("euler driver handles spans, strides and a short tail step") {
  auto sys = decay1d();
  Sigmoid s{SigmoidKind::Tanh, 1e-3, 1.0};
  SECTION("non-integral horizon lands exactly on t1") {
    Trajectory tr = smooth_simulate(sys, std::vector<double>{1.0}, 0.0, 0.10045, s, 1e-3, 1);
    REQUIRE(tr.size() == 102);
    CHECK(tr.t(100) == Catch::Approx(0.1).epsilon(1e-15));
    CHECK(tr.back_t() == 0.10045);
  }
  SECTION("stride decimates but keeps the final point") {
    Trajectory tr = smooth_simulate(sys, std::vector<double>{1.0}, 0.0, 1.0, s, 1e-3, 10);
    REQUIRE(tr.size() == 101);
    CHECK(tr.t(0) == 0.0);
    CHECK(tr.t(1) == Catch::Approx(0.01).epsilon(1e-15));
    CHECK(tr.back_t() == 1.0);
  }
  SECTION("degenerate span yields a single sample") {
    Trajectory tr = smooth_simulate(sys, std::vector<double>{1.0}, 2.0, 2.0, s, 1e-3, 1);
    REQUIRE(tr.size() == 1);
    CHECK(tr.t(0) == 2.0);
  }
  SECTION("bad arguments are rejected") {
    CHECK_THROWS_AS(smooth_simulate(sys, std::vector<double>{1.0}, 0.0, 1.0, s, 0.0, 1),
                    ValidationError);
    CHECK_THROWS_AS(smooth_simulate(sys, std::vector<double>{1.0}, 1.0, 0.0, s, 1e-3, 1),
                    ValidationError);
    CHECK_THROWS_AS(smooth_simulate(sys, std::vector<double>{1.0, 2.0}, 0.0, 1.0, s, 1e-3, 1),
                    ValidationError);
  }
}

TEST_CASE("modes and lambda labels follow the sigmoid of h") {
  auto sys = crossing1d();
  Sigmoid s{SigmoidKind::Tanh, 0.01, 1.0};
  Trajectory tr = smooth_simulate(sys, std::vector<double>{-0.05}, 0.0, 0.1, s, 1e-3, 1);
  bool saw_minus = false, saw_transit = false, saw_plus = false;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    double h = tr.x(k)[0];
    REQUIRE(tr.lam(k) == std::tanh(h / 0.01));
    if (std::abs(h) <= 0.01) {
      REQUIRE(tr.mode(k) == Mode::InLayerTransit);
      saw_transit = true;
    } else if (h > 0) {
      REQUIRE(tr.mode(k) == Mode::FreePlus);
      saw_plus = true;
    } else {
      REQUIRE(tr.mode(k) == Mode::FreeMinus);
      saw_minus = true;
    }
  }
  CHECK(saw_minus);
  CHECK(saw_transit);
  CHECK(saw_plus);
}

TEST_CASE("smooth runs shadow the event-driven integrator away from hits") {
  // Closed forms for the classical and hidden captures; the smoothed run must
  // stay within 10 eps outside a 20 eps window around the surface hit.
  const double eps = 1e-4, step = 1e-6;
  Sigmoid s{SigmoidKind::Tanh, eps, 1.0};
  SECTION("classical sliding") {
    Trajectory tr =
        smooth_simulate(classical2d(), std::vector<double>{0.3, 0.0}, 0.0, 1.0, s, step, 100);
    for (std::size_t k = 0; k < tr.size(); ++k) {
      double t = tr.t(k);
      if (std::abs(t - 0.3) <= 20 * eps) continue;
      double x1 = t < 0.3 ? 0.3 - t : 0.0;
      double x2 = t < 0.3 ? t : 0.3 - (t - 0.3);
      REQUIRE(std::abs(tr.x(k)[0] - x1) <= 10 * eps);
      REQUIRE(std::abs(tr.x(k)[1] - x2) <= 10 * eps);
    }
  }
  SECTION("hidden sliding") {
    Trajectory tr =
        smooth_simulate(hidden2d(), std::vector<double>{-0.5, 0.0}, 0.0, 1.0, s, step, 100);
    const double r = 1.0 / std::sqrt(2.0);
    for (std::size_t k = 0; k < tr.size(); ++k) {
      double t = tr.t(k);
      if (std::abs(t - 0.5) <= 20 * eps) continue;
      double x1 = t < 0.5 ? t - 0.5 : 0.0;
      double x2 = t < 0.5 ? t : 0.5 + r * (t - 0.5);
      REQUIRE(std::abs(tr.x(k)[0] - x1) <= 10 * eps);
      REQUIRE(std::abs(tr.x(k)[1] - x2) <= 10 * eps);
    }
  }
  SECTION("crossing") {
    auto sys = SwitchedSystem::combined(
        2, Expr::parse("x1", 2), {Expr::parse("1", 2), Expr::parse("-lam", 2)});
    Trajectory tr = smooth_simulate(sys, std::vector<double>{-0.5, 0.0}, 0.0, 1.0, s, step, 100);
    for (std::size_t k = 0; k < tr.size(); ++k) {
      double t = tr.t(k);
      if (std::abs(t - 0.5) <= 20 * eps) continue;
      double x2 = t < 0.5 ? t : 1.0 - t;
      REQUIRE(std::abs(tr.x(k)[0] - (t - 0.5)) <= 10 * eps);
      REQUIRE(std::abs(tr.x(k)[1] - x2) <= 10 * eps);
    }
  }
}

TEST_CASE("diverging smooth runs abort with a diagnostic") {
  auto sys = SwitchedSystem::combined(1, Expr::parse("x1", 1),
                                      {Expr::parse("1000000*x1^2 + 1", 1)});
  Sigmoid s{SigmoidKind::Tanh, 1e-3, 1.0};
  CHECK_THROWS_AS(smooth_simulate(sys, std::vector<double>{1.0}, 0.0, 10.0, s, 1e-3, 1),
                  NumericalError);
}

TEST_CASE("stochastic runs are seeded and collapse to smooth at zero noise") {
  auto sys = hidden2d();
  Sigmoid s{SigmoidKind::Tanh, 1e-3, 1.0};
  std::vector<double> x0{-0.01, 0.0};
  SECTION("kappa = 0 is bit-identical to the smooth driver") {
    Trajectory a = smooth_simulate(sys, x0, 0.0, 0.2, s, 1e-4, 1);
    Trajectory b = stochastic_simulate(sys, x0, 0.0, 0.2, s, NoiseConfig{0.0, 99, 1e-4}, 1);
    REQUIRE(a.size() == b.size());
    bool same = true;
    for (std::size_t k = 0; k < a.size(); ++k) {
      same = same && a.t(k) == b.t(k) && a.lam(k) == b.lam(k);
      for (int i = 0; i < 2; ++i) same = same && a.x(k)[i] == b.x(k)[i];
    }
    CHECK(same);
  }
  SECTION("equal seeds agree bit for bit, different seeds do not") {
    NoiseConfig n1{0.05, 7, 1e-4};
    Trajectory a = stochastic_simulate(sys, x0, 0.0, 0.1, s, n1, 1);
    Trajectory b = stochastic_simulate(sys, x0, 0.0, 0.1, s, n1, 1);
    Trajectory c = stochastic_simulate(sys, x0, 0.0, 0.1, s, NoiseConfig{0.05, 8, 1e-4}, 1);
    bool same = true, diff = false;
    for (std::size_t k = 0; k < a.size(); ++k)
      for (int i = 0; i < 2; ++i) {
        same = same && a.x(k)[i] == b.x(k)[i];
        diff = diff || a.x(k)[i] != c.x(k)[i];
      }
    CHECK(same);
    CHECK(diff);
  }
  SECTION("diffusion scales as kappa^2 t") {
    const double kappa = 0.3, horizon = 0.5;
    double sq = 0.0;
    const int runs = 400;
    for (int i = 0; i < runs; ++i) {
      Trajectory tr = stochastic_simulate(noise1d(), std::vector<double>{0.0}, 0.0, horizon,
                                          Sigmoid{SigmoidKind::Tanh, 1e-3, 1.0},
                                          NoiseConfig{kappa, 1000 + static_cast<std::uint64_t>(i), 1e-3},
                                          1000000);
      double v = tr.back_x()[0];
      sq += v * v;
    }
    double var = sq / runs;
    CHECK(var == Catch::Approx(kappa * kappa * horizon).epsilon(0.25));
  }
  SECTION("negative kappa is rejected") {
    CHECK_THROWS_AS(
        stochastic_simulate(sys, x0, 0.0, 0.1, s, NoiseConfig{-1.0, 1, 1e-4}, 1),
        ValidationError);
  }
}

TEST_CASE("layer transit profiles pick out in-layer runs") {
  auto sys = crossing1d();
  Sigmoid s{SigmoidKind::Tanh, 0.01, 1.0};
  // crosses the band once: x = -0.05 + t, inside |x| <= 0.01 for t in [0.04, 0.06]
  Trajectory tr = smooth_simulate(sys, std::vector<double>{-0.05}, 0.0, 0.1, s, 1e-3, 1);
  auto prof = layer_transit_profile(tr, 0);
  REQUIRE(prof.size() >= 15);
  CHECK(prof.front().delta_t == 0.0);
  for (std::size_t i = 1; i < prof.size(); ++i) {
    REQUIRE(prof[i].delta_t > prof[i - 1].delta_t);
    REQUIRE(prof[i].lam > prof[i - 1].lam);  // pure crossing: monotone lambda
  }
  CHECK(prof.back().delta_t == Catch::Approx(0.02).margin(2.5e-3));
  CHECK_THROWS_AS(layer_transit_profile(tr, 1), std::out_of_range);
  CHECK_THROWS_AS(layer_transit_profile(tr, -1), std::out_of_range);

  // two transits when the state re-enters the band
  Trajectory two(1);
  double xs[1];
  auto push = [&](double t, double x, Mode m) {
    xs[0] = x;
    two.push(t, xs, 0.0, m);
  };
  push(0.0, -0.5, Mode::FreeMinus);
  push(0.1, 0.0, Mode::InLayerTransit);
  push(0.2, 0.001, Mode::InLayerTransit);
  push(0.3, 0.5, Mode::FreePlus);
  push(0.4, 0.002, Mode::InLayerTransit);
  push(0.5, -0.5, Mode::FreeMinus);
  CHECK(layer_transit_profile(two, 0).size() == 2);
  CHECK(layer_transit_profile(two, 1).size() == 1);
  CHECK(layer_transit_profile(two, 1)[0].delta_t == 0.0);
  CHECK_THROWS_AS(layer_transit_profile(two, 2), std::out_of_range);
}

TEST_CASE("stick detection and the washout curve") {
  Sigmoid s{SigmoidKind::Tanh, 1e-3, 1.0};
  SECTION("sticking run versus crossing run") {
    Trajectory stick =
        smooth_simulate(hidden2d(), std::vector<double>{-0.02, 0.0}, 0.0, 0.3, s, 1e-4, 1);
    CHECK(trajectory_sticks(hidden2d(), stick, 1e-3));
    auto cross = SwitchedSystem::combined(
        2, Expr::parse("x1", 2), {Expr::parse("1", 2), Expr::parse("-lam", 2)});
    Trajectory crossing =
        smooth_simulate(cross, std::vector<double>{-0.02, 0.0}, 0.0, 0.3, s, 1e-4, 1);
    CHECK(!trajectory_sticks(cross, crossing, 1e-3));
  }
  SECTION("reference scale") {
    CHECK(washout_reference_scale(1e-3) ==
          Catch::Approx(0.012031825601340968).epsilon(1e-15));
    CHECK(washout_reference_scale(1e-2) ==
          Catch::Approx(0.04659906017846561).epsilon(1e-15));
  }
  SECTION("classical sliding systems are rejected") {
    CHECK_THROWS_AS(washout_curve(classical2d(), std::vector<double>{0.0, 0.0}, s, {0.0}, 2, 0.1),
                    ValidationError);
  }
  SECTION("hidden sliding sticks at zero noise and washes out at large noise") {
    std::vector<double> x0{-0.02, 0.0};
    auto pts = washout_curve(hidden2d(), x0, s, {0.0, 10.0}, 10, 0.3, 1e-4, 5);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].kappa == 0.0);
    CHECK(pts[0].stick_fraction == 1.0);
    CHECK(pts[1].kappa == 10.0);
    CHECK(pts[1].stick_fraction <= 0.05);
    auto again = washout_curve(hidden2d(), x0, s, {0.0, 10.0}, 10, 0.3, 1e-4, 5);
    CHECK(again[0].stick_fraction == pts[0].stick_fraction);
    CHECK(again[1].stick_fraction == pts[1].stick_fraction);
  }
}
