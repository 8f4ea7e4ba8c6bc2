#include "capguard/barrier.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "capguard/classifier.hpp"
#include "test_support.hpp"

namespace capguard {
namespace {

using testing::cali;

double dist(const State& a, const State& b) { return std::hypot(a.x1 - b.x1, a.x2 - b.x2); }

BarrierCurve must(const std::optional<BarrierCurve>& c) {
  if (!c) throw std::runtime_error("expected a barrier");
  return *c;
}

TEST(SwitchingInput, BangBangLaw) {
  const auto p = cali();
  EXPECT_EQ(switching_input(Costate{1.0, 0.0}, SetKind::Admissible, p), p.u_max);
  EXPECT_EQ(switching_input(Costate{-1.0, 0.0}, SetKind::Admissible, p), p.u_min);
  EXPECT_EQ(switching_input(Costate{1.0, 0.0}, SetKind::Mrpi, p), p.u_min);
  EXPECT_EQ(switching_input(Costate{-1.0, 0.0}, SetKind::Mrpi, p), p.u_max);
  EXPECT_EQ(switching_input(Costate{0.0, 1.0}, SetKind::Admissible, p), p.u_max);
  EXPECT_THROW(switching_input(Costate{0.0, 0.0}, SetKind::Admissible, p), std::invalid_argument);
}

TEST(ComputeBarrier, RejectsRegimesWithoutNontrivialSets) {
  EXPECT_THROW(compute_barrier(cali(), testing::kComfortable, SetKind::Admissible), BarrierPreconditionError);
  EXPECT_THROW(compute_barrier(cali(), testing::kDesperate, SetKind::Mrpi), BarrierPreconditionError);
}

TEST(ComputeBarrier, ComfortableViableCurves) {
  const auto p = cali();
  const auto adm = must(compute_barrier(p, testing::kComfortableViable, SetKind::Admissible));
  EXPECT_EQ(adm.tangent.face, ConstraintFace::G3);
  EXPECT_NEAR(adm.tangent.point.x1, 0.3459570764136152, 1e-12);
  EXPECT_EQ(adm.termination.kind, TerminationKind::HitFace);
  EXPECT_EQ(adm.termination.face, ConstraintFace::G4);
  EXPECT_NEAR(adm.termination.point.x1, 0.597354, 1e-5);
  EXPECT_EQ(adm.termination.point.x2, 0.0);

  const auto mrpi = must(compute_barrier(p, testing::kComfortableViable, SetKind::Mrpi));
  EXPECT_EQ(mrpi.termination.face, ConstraintFace::G4);
  EXPECT_NEAR(mrpi.termination.point.x1, 0.48222, 1e-5);
  // The MRPI barrier lies inside the admissible one.
  EXPECT_LT(mrpi.termination.point.x1, adm.termination.point.x1);
}

TEST(ComputeBarrier, ViableCurveRunsFromG1ToG3) {
  const auto adm = must(compute_barrier(cali(), testing::kViable, SetKind::Admissible));
  EXPECT_EQ(adm.tangent.face, ConstraintFace::G1);
  EXPECT_NEAR(adm.tangent.point.x2, 0.11517765000737137, 1e-12);
  EXPECT_EQ(adm.termination.face, ConstraintFace::G3);
  EXPECT_NEAR(adm.termination.point.x1, 0.11298, 1e-4);
  EXPECT_EQ(adm.termination.point.x2, 0.2);
}

TEST(ComputeBarrier, ViableMrpiCandidateIsRejected) {
  // The MRPI tangent on G1 exists but the first backward step leaves G_-.
  EXPECT_FALSE(compute_barrier(cali(), testing::kViable, SetKind::Mrpi).has_value());
  const auto z = tangent_point_g1(cali(), testing::kViable, SetKind::Mrpi);
  ASSERT_TRUE(z.has_value());
  EXPECT_NEAR(z->point.x2, 0.07670831490490933, 1e-12);
  EXPECT_FALSE(trace_barrier(cali(), testing::kViable, *z).has_value());
}

TEST(ComputeBarrier, StartsFromTheTerminalCostate) {
  for (const auto& caps : {testing::kComfortableViable, testing::kViable}) {
    const auto c = must(compute_barrier(cali(), caps, SetKind::Admissible));
    const Costate l0 = c.samples.front().costate;
    const Costate t = c.tangent.terminal_costate;
    EXPECT_NEAR(l0.lambda1 * t.lambda2 - l0.lambda2 * t.lambda1, 0.0, 1e-15);
    EXPECT_GT(l0.lambda1 * t.lambda1 + l0.lambda2 * t.lambda2, 0.0);
  }
}

TEST(ComputeBarrier, BoxAdmissibleCaseHasOnlyAnMrpiCurve) {
  const ConstraintCaps caps{0.55, 0.7};
  EXPECT_FALSE(compute_barrier(cali(), caps, SetKind::Admissible).has_value());
  const auto mrpi = must(compute_barrier(cali(), caps, SetKind::Mrpi));
  EXPECT_EQ(mrpi.termination.face, ConstraintFace::G3);
  EXPECT_NEAR(mrpi.termination.point.x1, 0.539071, 1e-5);
}

TEST(ComputeBarrier, CurvesAreWellFormed) {
  for (const auto& caps : {testing::kComfortableViable, testing::kViable}) {
    for (SetKind kind : {SetKind::Admissible, SetKind::Mrpi}) {
      const auto c = compute_barrier(cali(), caps, kind);
      if (!c) continue;
      ASSERT_GE(c->samples.size(), 2u);
      EXPECT_EQ(c->samples.front().state, c->tangent.point);
      EXPECT_EQ(c->samples.back().state, c->termination.point);
      for (std::size_t i = 0; i < c->samples.size(); ++i) {
        const auto& s = c->samples[i];
        EXPECT_LE(box_violation(s.state, caps), 1e-9);
        EXPECT_NEAR(std::hypot(s.costate.lambda1, s.costate.lambda2), 1.0, 1e-12);
        if (i > 0) {
          EXPECT_GT(s.s, c->samples[i - 1].s);
          EXPECT_LE(dist(s.state, c->samples[i - 1].state), 1e-3 + 1e-12);
        }
      }
    }
  }
}

TEST(ComputeBarrier, HorizonErrorCarriesPartialCurve) {
  BarrierOptions options;
  options.horizon = 1.0;
  try {
    compute_barrier(cali(), testing::kComfortableViable, SetKind::Admissible, options);
    FAIL() << "expected BarrierHorizonError";
  } catch (const BarrierHorizonError& e) {
    ASSERT_FALSE(e.partial().samples.empty());
    EXPECT_LE(e.partial().samples.back().s, 1.0 + 1e-12);
    EXPECT_EQ(e.partial().termination.kind, TerminationKind::HorizonExceeded);
  }
}

TEST(ComputeBarrier, Deterministic) {
  const auto a = must(compute_barrier(cali(), testing::kViable, SetKind::Admissible));
  const auto b = must(compute_barrier(cali(), testing::kViable, SetKind::Admissible));
  EXPECT_EQ(barrier_csv(a), barrier_csv(b));
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(VerifyBarrier, ComputedCurvesPass) {
  for (const auto& caps : {testing::kComfortableViable, testing::kViable, ConstraintCaps{0.55, 0.7}}) {
    for (SetKind kind : {SetKind::Admissible, SetKind::Mrpi}) {
      const auto c = compute_barrier(cali(), caps, kind);
      if (!c) continue;
      const auto v = verify_barrier(*c, cali(), caps);
      EXPECT_TRUE(v.passed()) << to_json(v).dump();
      EXPECT_LE(v.hamiltonian.worst, 1e-9);
      EXPECT_LE(v.graze_distance, 1e-6);
    }
  }
}

TEST(VerifyBarrier, NegatedCostateFailsExtremality) {
  auto c = must(compute_barrier(cali(), testing::kComfortableViable, SetKind::Admissible));
  for (auto& s : c.samples) s.costate = Costate{-s.costate.lambda1, -s.costate.lambda2};
  const auto v = verify_barrier(c, cali(), testing::kComfortableViable);
  EXPECT_FALSE(v.extremality.passed);
  EXPECT_FALSE(v.passed());
  EXPECT_FALSE(v.failures().empty());
}

TEST(VerifyBarrier, FlippedInputsFail) {
  const auto p = cali();
  auto c = must(compute_barrier(p, testing::kComfortableViable, SetKind::Admissible));
  for (auto& s : c.samples) s.u = s.u == p.u_max ? p.u_min : p.u_max;
  EXPECT_FALSE(verify_barrier(c, p, testing::kComfortableViable).passed());
}

TEST(VerifyBarrier, DisplacedStatesFail) {
  auto c = must(compute_barrier(cali(), testing::kViable, SetKind::Admissible));
  for (std::size_t i = 1; i < c.samples.size(); ++i) c.samples[i].state.x1 *= 0.98;
  EXPECT_FALSE(verify_barrier(c, cali(), testing::kViable).passed());
}

TEST(VerifyBarrier, TruncatedCurveStillGrazes) {
  auto c = must(compute_barrier(cali(), testing::kComfortableViable, SetKind::Mrpi));
  c.samples.resize(c.samples.size() / 2);
  const auto v = verify_barrier(c, cali(), testing::kComfortableViable);
  EXPECT_TRUE(v.graze.passed) << to_json(v).dump();
  EXPECT_TRUE(v.hamiltonian.passed);
  EXPECT_TRUE(v.extremality.passed);
}

TEST(BarrierExport, CsvAndJson) {
  const auto c = must(compute_barrier(cali(), testing::kViable, SetKind::Admissible));
  const std::string csv = barrier_csv(c);
  EXPECT_EQ(csv.rfind("s,x1,x2,lambda1,lambda2,u\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), c.samples.size() + 1);

  const auto back = barrier_from_json(nlohmann::json::parse(to_json(c).dump()));
  ASSERT_EQ(back.samples.size(), c.samples.size());
  for (std::size_t i = 0; i < c.samples.size(); ++i) {
    EXPECT_EQ(back.samples[i].state, c.samples[i].state);
    EXPECT_EQ(back.samples[i].costate, c.samples[i].costate);
    EXPECT_EQ(back.samples[i].u, c.samples[i].u);
    EXPECT_EQ(back.samples[i].s, c.samples[i].s);
  }
  EXPECT_EQ(back.termination.face, c.termination.face);
  EXPECT_EQ(back.switches, c.switches);
  EXPECT_EQ(back.tangent.point, c.tangent.point);
  EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
}

TEST(BarrierProperties, RandomNontrivialCasesVerify) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> cap(0.03, 0.95);
  const auto p = cali();
  int traced = 0;
  for (int k = 0; k < 200 && traced < 24; ++k) {
    const ConstraintCaps caps{cap(rng), cap(rng)};
    const Regime r = classify(p, caps).regime;
    if (r != Regime::Viable && r != Regime::ComfortableViable) continue;
    for (SetKind kind : {SetKind::Admissible, SetKind::Mrpi}) {
      const auto c = compute_barrier(p, caps, kind);
      if (!c) continue;
      ++traced;
      const auto v = verify_barrier(*c, p, caps);
      EXPECT_TRUE(v.passed()) << "caps " << caps.xbar1 << "," << caps.xbar2 << ' ' << to_json(v).dump();
      EXPECT_NE(c->termination.kind, TerminationKind::HorizonExceeded);
    }
  }
  EXPECT_GE(traced, 10);
}

}  // namespace
}  // namespace capguard
