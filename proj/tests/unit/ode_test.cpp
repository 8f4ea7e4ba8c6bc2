#include "capguard/ode.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace capguard::ode {
namespace {

TEST(DormandPrince, ExponentialDecayToTightTolerance) {
  auto stepper = make_stepper<1>([](double, const Vec<1>& y) { return Vec<1>{-y[0]}; });
  Vec<1> y{1.0};
  Vec<1> f = stepper.eval(0.0, y);
  double t = 0.0;
  while (t < 5.0) {
    const auto s = stepper.advance(t, y, f, 5.0);
    t = s.t1;
    y = s.y1;
    f = s.f1;
  }
  EXPECT_EQ(t, 5.0);
  EXPECT_NEAR(y[0], std::exp(-5.0), 1e-9);
}

TEST(DormandPrince, HarmonicOscillatorConservesEnergy) {
  auto stepper = make_stepper<2>([](double, const Vec<2>& y) { return Vec<2>{y[1], -y[0]}; });
  Vec<2> y{1.0, 0.0};
  Vec<2> f = stepper.eval(0.0, y);
  double t = 0.0;
  const double end = 20.0;
  while (t < end) {
    const auto s = stepper.advance(t, y, f, end);
    t = s.t1;
    y = s.y1;
    f = s.f1;
  }
  EXPECT_NEAR(y[0], std::cos(end), 1e-8);
  EXPECT_NEAR(y[1], -std::sin(end), 1e-8);
}

TEST(DormandPrince, ClippedStepEndsExactlyOnLimit) {
  Tolerances tol;
  tol.initial_step = 0.7;
  auto stepper = make_stepper<1>([](double, const Vec<1>&) { return Vec<1>{1.0}; }, tol);
  const auto s = stepper.advance(0.0, Vec<1>{0.0}, Vec<1>{1.0}, 0.3);
  EXPECT_EQ(s.t1, 0.3);
  EXPECT_NEAR(s.y1[0], 0.3, 1e-15);
  // A clip does not shrink the suggestion for the next step.
  EXPECT_GE(stepper.suggested_step(), 0.7);
}

TEST(DormandPrince, RespectsMaxStep) {
  auto stepper = make_stepper<1>([](double, const Vec<1>&) { return Vec<1>{0.0}; });
  Vec<1> y{0.0};
  double t = 0.0;
  for (int i = 0; i < 40; ++i) {
    const auto s = stepper.advance(t, y, Vec<1>{0.0}, 100.0);
    EXPECT_LE(s.t1 - s.t0, 1.0 + 1e-15);
    t = s.t1;
  }
}

TEST(DormandPrince, RejectsLimitBehindTime) {
  auto stepper = make_stepper<1>([](double, const Vec<1>& y) { return y; });
  EXPECT_THROW(stepper.advance(1.0, Vec<1>{1.0}, Vec<1>{1.0}, 1.0), std::invalid_argument);
}

TEST(Hermite, ReproducesCubicsExactly) {
  auto p = [](double t) { return 2.0 * t * t * t - t * t + 3.0 * t - 1.0; };
  auto dp = [](double t) { return 6.0 * t * t - 2.0 * t + 3.0; };
  Step<1> s{0.5, 2.0, {p(0.5)}, {p(2.0)}, {dp(0.5)}, {dp(2.0)}};
  for (double t = 0.5; t <= 2.0; t += 0.125) EXPECT_NEAR(hermite(s, t)[0], p(t), 1e-12);
  EXPECT_EQ(hermite(s, 0.5)[0], p(0.5));
}

}  // namespace
}  // namespace capguard::ode
