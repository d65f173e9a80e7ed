#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "hidyn/sigmoid.hpp"

using namespace hidyn;

namespace {

Sigmoid sig(SigmoidKind k, double eps) { return Sigmoid{k, eps, 1.0}; }

const SigmoidKind kAllKinds[] = {
    SigmoidKind::Tanh,       SigmoidKind::Arctan,          SigmoidKind::Hill,
    SigmoidKind::AlgebraicSqrt, SigmoidKind::NonAnalyticBump,
};

}  // namespace

TEST_CASE("sigmoid evaluation matches closed forms") {
  SECTION("tanh") {
    CHECK(sigmoid_eval(sig(SigmoidKind::Tanh, 1e-3), 0.0) == 0.0);
    CHECK(sigmoid_eval(sig(SigmoidKind::Tanh, 1e-3), 0.01) ==
          Catch::Approx(0.9999999958776927).epsilon(1e-15));
    CHECK(sigmoid_eval(sig(SigmoidKind::Tanh, 0.5), -1.5) == Catch::Approx(-std::tanh(3.0)));
  }
  SECTION("arctan") {
    CHECK(sigmoid_eval(sig(SigmoidKind::Arctan, 0.1), 1.0) ==
          Catch::Approx(0.936548965138893).epsilon(1e-15));
    // leading expansion sign(h) - (2/pi)(eps/h) is within 1e-3 here
    CHECK(std::abs(sigmoid_eval(sig(SigmoidKind::Arctan, 0.1), 1.0) - 0.9363380227632419) < 1e-3);
  }
  SECTION("hill reduces to tanh(h / 2 eps) and ignores theta") {
    Sigmoid a{SigmoidKind::Hill, 0.2, 1.0};
    Sigmoid b{SigmoidKind::Hill, 0.2, 7.3};
    CHECK(sigmoid_eval(a, 0.37) == Catch::Approx(0.7282542059818115).epsilon(1e-15));
    CHECK(sigmoid_eval(a, 0.37) == sigmoid_eval(b, 0.37));
    CHECK(sigmoid_eval(a, -0.37) == -sigmoid_eval(a, 0.37));
  }
  SECTION("algebraic sqrt") {
    CHECK(sigmoid_eval(sig(SigmoidKind::AlgebraicSqrt, 0.1), 1.0) ==
          Catch::Approx(10.0 / std::sqrt(101.0)).epsilon(1e-15));
    CHECK(sigmoid_eval(sig(SigmoidKind::AlgebraicSqrt, 1.0), 0.0) == 0.0);
    // no overflow at extreme arguments
    CHECK(sigmoid_eval(sig(SigmoidKind::AlgebraicSqrt, 1e-300), 1e300) == 1.0);
  }
  SECTION("non-analytic bump") {
    Sigmoid s = sig(SigmoidKind::NonAnalyticBump, 1.0);
    CHECK(sigmoid_eval(s, 1.0) == 1.0);
    CHECK(sigmoid_eval(s, -1.0) == -1.0);
    CHECK(sigmoid_eval(s, 5.0) == 1.0);
    CHECK(sigmoid_eval(s, 0.0) == 0.0);
    CHECK(sigmoid_eval(s, 0.5) == Catch::Approx(0.6274695307445468).epsilon(1e-14));
    CHECK(sigmoid_eval(s, 0.9) == Catch::Approx(0.9990700307953132).epsilon(1e-14));
    CHECK(sigmoid_eval(s, 0.1) == Catch::Approx(0.12398429360692409).epsilon(1e-14));
    CHECK(sigmoid_eval(s, -0.5) == -sigmoid_eval(s, 0.5));
    // scaling: bump at (h, eps) equals bump at (h/eps, 1)
    Sigmoid t = sig(SigmoidKind::NonAnalyticBump, 0.01);
    CHECK(sigmoid_eval(t, 0.005) == Catch::Approx(0.6274695307445468).epsilon(1e-14));
    CHECK(sigmoid_eval(t, 0.01) == 1.0);
    CHECK(sigmoid_eval(t, 0.09) == 1.0);
  }
}

TEST_CASE("tail errors track the leading asymptotic term") {
  SECTION("tanh at h/eps = 3") {
    auto [pred, act] = tail_error(sig(SigmoidKind::Tanh, 1.0), 3.0);
    CHECK(act == Catch::Approx(-0.004945246313269536).epsilon(1e-14));
    CHECK(pred == Catch::Approx(-0.004957504353332717).epsilon(1e-14));
    CHECK(act / pred == Catch::Approx(0.9975273768433626).epsilon(1e-12));
  }
  SECTION("arctan at h/eps = 100") {
    auto [pred, act] = tail_error(sig(SigmoidKind::Arctan, 0.01), 1.0);
    CHECK(act / pred == Catch::Approx(0.9999666686665026).epsilon(1e-12));
  }
  SECTION("hill at h/eps = 5: ratio within 2 e^-5 of 1") {
    auto [pred, act] = tail_error(sig(SigmoidKind::Hill, 0.2), 1.0);
    CHECK(act == Catch::Approx(-0.013385701848569687).epsilon(1e-14));
    CHECK(std::abs(act / pred - 1.0) < 2.0 * std::exp(-5.0));
  }
  SECTION("algebraic sqrt at h/eps = 10") {
    auto [pred, act] = tail_error(sig(SigmoidKind::AlgebraicSqrt, 0.1), 1.0);
    CHECK(pred == Catch::Approx(-0.005).epsilon(1e-15));
    CHECK(act / pred == Catch::Approx(0.9925619580021694).epsilon(1e-12));
  }
  SECTION("bump is exact outside the layer") {
    auto [pred, act] = tail_error(sig(SigmoidKind::NonAnalyticBump, 0.5), 0.51);
    CHECK(pred == 0.0);
    CHECK(act == 0.0);
  }
  SECTION("negative h mirrors") {
    auto [pred, act] = tail_error(sig(SigmoidKind::Tanh, 1.0), -3.0);
    CHECK(act == Catch::Approx(0.004945246313269536).epsilon(1e-14));
    CHECK(pred == Catch::Approx(0.004957504353332717).epsilon(1e-14));
  }
  SECTION("inside the layer is rejected") {
    CHECK_THROWS_AS(tail_error(sig(SigmoidKind::Tanh, 1.0), 0.5), std::domain_error);
    CHECK_THROWS_AS(tail_error(sig(SigmoidKind::Tanh, 1.0), 1.0), std::domain_error);
  }
}

TEST_CASE("sigmoid properties") {
  SECTION("monotone and bounded for random pairs") {
    std::mt19937_64 gen(20240817u);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (SigmoidKind k : kAllKinds) {
      Sigmoid s = sig(k, 0.37);
      for (int i = 0; i < 1000; ++i) {
        double h1 = u(gen) * s.eps;
        double h2 = u(gen) * s.eps;
        if (h1 > h2) std::swap(h1, h2);
        double y1 = sigmoid_eval(s, h1);
        double y2 = sigmoid_eval(s, h2);
        REQUIRE(y1 <= y2 + 1e-15);
        REQUIRE(std::abs(y1) <= 1.0);
        REQUIRE(std::abs(y2) <= 1.0);
      }
    }
  }
  SECTION("eps convergence to sign(h)") {
    const double h = 0.3;
    for (SigmoidKind k : kAllKinds) {
      double prev = -1.0;
      double first = -1.0, last = -1.0;
      for (int d = 0; d < 34; ++d) {
        Sigmoid s = sig(k, 0.1 * std::pow(0.5, d));
        double err = std::abs(sigmoid_eval(s, h) - 1.0);
        if (d == 0) first = err;
        last = err;
        if (d > 0) {
          REQUIRE(err <= prev + 1e-18);
          // geometric (in fact squaring) decay for the exponential tails
          if ((k == SigmoidKind::Tanh || k == SigmoidKind::Hill) && prev > 1e-280)
            REQUIRE(err <= 0.6 * prev);
        }
        prev = err;
      }
      REQUIRE(first < 1.0);
      REQUIRE(last <= first * std::pow(2.0, -25) + 1e-300);
    }
  }
  SECTION("name round trip") {
    for (SigmoidKind k : kAllKinds) {
      auto parsed = sigmoid_kind_from_name(to_string(k));
      REQUIRE(parsed.has_value());
      CHECK(*parsed == k);
    }
    CHECK(!sigmoid_kind_from_name("smoothstep").has_value());
  }
}
