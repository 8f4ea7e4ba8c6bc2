#include "capguard/policy.hpp"

#include <gtest/gtest.h>

#include <random>

#include "capguard/analysis.hpp"
#include "test_support.hpp"

namespace capguard {
namespace {

using testing::cali;

class PolicyCv : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    analysis_ = new Analysis(analyze(cali(), testing::kComfortableViable));
    ctx_ = new PolicyContext(PolicyContext::from(*analysis_));
  }
  static void TearDownTestSuite() {
    delete ctx_;
    delete analysis_;
  }
  static Analysis* analysis_;
  static PolicyContext* ctx_;
};
Analysis* PolicyCv::analysis_ = nullptr;
PolicyContext* PolicyCv::ctx_ = nullptr;

TEST_F(PolicyCv, AdviceTable) {
  auto advice = recommend(State{0.1, 0.1}, *ctx_);
  EXPECT_EQ(advice.action, Action::UseMin);
  EXPECT_EQ(advice.rationale, Rationale::InsideMrpi);

  advice = recommend(State{0.55, 0.02}, *ctx_);
  EXPECT_EQ(advice.action, Action::UseMin);
  EXPECT_EQ(advice.rationale, Rationale::InsideAdmissible);

  advice = recommend(analysis_->admissible_barrier->samples[200].state, *ctx_);
  EXPECT_EQ(advice.action, Action::UseMax);
  EXPECT_EQ(advice.rationale, Rationale::OnAdmissibleBarrier);

  advice = recommend(State{0.55, 0.0}, *ctx_);
  EXPECT_EQ(advice.action, Action::UseMax);
  EXPECT_EQ(advice.rationale, Rationale::OnAdmissibleConstraintBoundary);

  advice = recommend(State{0.65, 0.15}, *ctx_);
  EXPECT_EQ(advice.action, Action::RelaxCapsOrIncreaseFumigation);
  EXPECT_EQ(advice.rationale, Rationale::OutsideAdmissible);

  advice = recommend(State{0.9, 0.9}, *ctx_);
  EXPECT_EQ(advice.action, Action::RelaxCapsOrIncreaseFumigation);

  EXPECT_THROW(recommend(State{1.1, 0.1}, *ctx_), std::invalid_argument);
  EXPECT_THROW(recommend(State{0.1, -0.1}, *ctx_), std::invalid_argument);
}

TEST_F(PolicyCv, InputMapping) {
  EXPECT_EQ(input_for(Action::UseMin, ctx_->params), ctx_->params.u_min);
  EXPECT_EQ(input_for(Action::UseMax, ctx_->params), ctx_->params.u_max);
  EXPECT_EQ(input_for(Action::RelaxCapsOrIncreaseFumigation, ctx_->params), ctx_->params.u_max);
}

TEST_F(PolicyCv, ClosedLoopLatchesNearTheBarrier) {
  ClosedLoopOptions options;
  ClosedLoopState state;
  const double umin = ctx_->params.u_min;
  const double umax = ctx_->params.u_max;
  EXPECT_EQ(closed_loop_input(*ctx_, State{0.55, 0.02}, options, state), umin);
  EXPECT_FALSE(state.latched);
  // Points on the ray from a barrier sample toward the interior, at prescribed
  // distances from the outer boundary.
  const State near = analysis_->admissible_barrier->samples[150].state;
  const State interior{0.45, 0.02};
  auto at_distance = [&](double target) {
    double lo = 0.0;
    double hi = 1.0;
    for (int k = 0; k < 100; ++k) {
      const double mid = 0.5 * (lo + hi);
      const State x{near.x1 + mid * (interior.x1 - near.x1), near.x2 + mid * (interior.x2 - near.x2)};
      (distance_to_outer_boundary(analysis_->admissible, x) < target ? lo : hi) = mid;
    }
    return State{near.x1 + hi * (interior.x1 - near.x1), near.x2 + hi * (interior.x2 - near.x2)};
  };
  const State inward = at_distance(0.6 * options.band);
  const State middle = at_distance(1.5 * options.band);
  ASSERT_FALSE(contains(analysis_->mrpi, middle).in_closure());
  EXPECT_EQ(closed_loop_input(*ctx_, inward, options, state), umax);
  EXPECT_TRUE(state.latched);
  // Still latched between band and 2 * band.
  EXPECT_GT(distance_to_outer_boundary(analysis_->admissible, middle), options.band);
  EXPECT_EQ(closed_loop_input(*ctx_, middle, options, state), umax);
  ClosedLoopState fresh;
  EXPECT_EQ(closed_loop_input(*ctx_, middle, options, fresh), umin);
  EXPECT_EQ(closed_loop_input(*ctx_, State{0.55, 0.02}, options, state), umin);
  EXPECT_FALSE(state.latched);
}

TEST_F(PolicyCv, ClosedLoopKeepsAdmissibleStatesInTheBox) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u1(0.0, 0.7);
  std::uniform_real_distribution<double> u2(0.0, 0.2);
  int tried = 0;
  while (tried < 30) {
    const State x{u1(rng), u2(rng)};
    if (contains(analysis_->admissible, x).kind != MembershipKind::Inside) continue;
    if (contains(analysis_->mrpi, x).in_closure()) continue;
    ++tried;
    const auto traj = simulate(ctx_->params, ctx_->caps, x, InputSource::closed_loop(*ctx_), 1000.0);
    EXPECT_FALSE(traj.violation.has_value()) << x.x1 << "," << x.x2;
    EXPECT_FALSE(traj.relax_caps_advised);
  }
}

TEST_F(PolicyCv, ClosedLoopReportsRelaxAdvice) {
  SimulateOptions options;
  options.stop_at_violation = true;
  const auto traj = simulate(ctx_->params, ctx_->caps, State{0.69, 0.19}, InputSource::closed_loop(*ctx_), 200.0,
                             options);
  EXPECT_TRUE(traj.relax_caps_advised);
  ASSERT_TRUE(traj.violation.has_value());
  EXPECT_EQ(traj.samples.front().u, ctx_->params.u_max);
}

TEST(Policy, DesperateAlwaysRelaxes) {
  const auto a = analyze(cali(), testing::kDesperate);
  const auto ctx = PolicyContext::from(a);
  for (const State& x : {State{0.0, 0.0}, State{0.1, 0.01}, State{0.5, 0.5}}) {
    const auto advice = recommend(x, ctx);
    EXPECT_EQ(advice.action, Action::RelaxCapsOrIncreaseFumigation);
    EXPECT_EQ(advice.rationale, Rationale::DesperateRegime);
  }
}

TEST(Simulate, ConvergesToEquilibrium) {
  const auto p = cali();
  const auto traj = simulate(p, ConstraintCaps{}, State{0.5, 0.5}, InputSource::constant(0.05), 3000.0);
  const State end = traj.samples.back().state;
  EXPECT_DOUBLE_EQ(traj.samples.back().t, 3000.0);
  EXPECT_NEAR(end.x1, 0.058580, 1e-4);
  EXPECT_NEAR(end.x2, 0.040612, 1e-4);
  EXPECT_FALSE(traj.violation.has_value());
}

TEST(Simulate, ValidatesInputs) {
  const auto p = cali();
  const ConstraintCaps caps = testing::kComfortableViable;
  EXPECT_THROW(simulate(p, caps, State{0.8, 0.1}, InputSource::constant(0.05), 10.0), std::invalid_argument);
  EXPECT_THROW(simulate(p, caps, State{0.1, 0.1}, InputSource::constant(0.05), 0.0), std::invalid_argument);
  EXPECT_THROW(simulate(p, caps, State{0.1, 0.1}, InputSource::constant(0.06), 10.0), std::invalid_argument);
  EXPECT_THROW(simulate(p, caps, State{0.1, 0.1}, InputSource::piecewise({{0.0, 0.04}, {5.0, 0.02}}), 10.0),
               std::invalid_argument);
  EXPECT_THROW(InputSource::piecewise({}), std::invalid_argument);
  EXPECT_THROW(InputSource::piecewise({{1.0, 0.04}}), std::invalid_argument);
  EXPECT_THROW(InputSource::piecewise({{0.0, 0.04}, {0.0, 0.05}}), std::invalid_argument);
}

TEST(Simulate, LocatesViolation) {
  const auto p = cali();
  SimulateOptions options;
  options.stop_at_violation = true;
  const auto traj =
      simulate(p, testing::kComfortableViable, State{0.69, 0.19}, InputSource::constant(p.u_max), 500.0, options);
  ASSERT_TRUE(traj.violation.has_value());
  EXPECT_EQ(traj.violation->face, ConstraintFace::G3);
  EXPECT_NEAR(traj.violation->state.x2, 0.2, 1e-8);
  EXPECT_GT(traj.violation->t, 0.0);
  EXPECT_LT(traj.samples.back().t, 500.0);
  const std::string csv = trajectory_csv(traj);
  EXPECT_EQ(csv.rfind("t,x1,x2,u,violated_face\n", 0), 0u);
  EXPECT_NE(csv.find(",G3\n"), std::string::npos);
}

TEST(Simulate, SplitRunsMatchSingleRun) {
  const auto p = cali();
  const ConstraintCaps caps = testing::kComfortable;
  const State x0{0.3, 0.4};
  std::mt19937_64 rng(43);
  const auto source = InputSource::piecewise(testing::random_schedule(rng, p, 200.0));
  const auto whole = simulate(p, caps, x0, source, 200.0);
  Simulator sim(p, caps, x0);
  Trajectory pieces;
  for (int k = 0; k < 50; ++k) sim.advance(4.0, source, pieces);
  EXPECT_EQ(sim.time(), 200.0);
  EXPECT_EQ(sim.state(), whole.samples.back().state);
  EXPECT_EQ(trajectory_csv(pieces), trajectory_csv(whole));
}

TEST(Simulate, StepsLandOnWholeDays) {
  const auto traj = simulate(cali(), ConstraintCaps{}, State{0.2, 0.2}, InputSource::constant(0.04), 100.0);
  const auto days = testing::daily(traj);
  EXPECT_EQ(days.size(), 101u);
}

TEST(SimulateProperties, MrpiStatesSurviveRandomSchedules) {
  const auto p = cali();
  const auto a = analyze(p, testing::kComfortableViable);
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u1(0.0, 0.7);
  std::uniform_real_distribution<double> u2(0.0, 0.2);
  int tried = 0;
  while (tried < 20) {
    const State x{u1(rng), u2(rng)};
    if (!contains(a.mrpi, x).in_closure()) continue;
    ++tried;
    for (int k = 0; k < 3; ++k) {
      const auto source = InputSource::piecewise(testing::random_schedule(rng, p, 1000.0));
      const auto traj = simulate(p, testing::kComfortableViable, x, source, 1000.0);
      EXPECT_FALSE(traj.violation.has_value()) << x.x1 << "," << x.x2;
    }
  }
}

TEST(PolicyExport, Json) {
  const auto a = analyze(cali(), testing::kComfortableViable);
  const auto j = to_json(recommend(State{0.1, 0.1}, PolicyContext::from(a)));
  EXPECT_EQ(j.at("action"), "use_min");
  EXPECT_EQ(j.at("rationale"), "inside_mrpi");
  EXPECT_EQ(j.at("mrpi").at("kind"), "inside");
  const auto t = to_json(simulate(cali(), testing::kComfortable, State{0.1, 0.1}, InputSource::constant(0.04), 3.0));
  EXPECT_TRUE(t.at("violation").is_null());
  EXPECT_EQ(t.at("columns").size(), 4u);
}

}  // namespace
}  // namespace capguard
