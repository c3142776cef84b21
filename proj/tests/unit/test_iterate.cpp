#include <gtest/gtest.h>

#include "gradlab/errors.hpp"
#include "gradlab/generator.hpp"
#include "gradlab/iterate.hpp"

using namespace gradlab;

TEST(Iterate, SingleExactStep) {
  SpectralProblem p({1.0, 2.0});
  const auto run = iterate(p, GradientVector{{1.0, 0.0}, 0}, StepsizeRule::sd());
  EXPECT_EQ(run.trajectory.steps(), 1u);
  EXPECT_EQ(run.termination, Termination::Tolerance);
  EXPECT_EQ(run.trajectory.gradients[1].norm(), 0.0);
  EXPECT_EQ(run.trajectory.fgaps[1], 0.0);
}

TEST(Iterate, ZeroStartTakesNoSteps) {
  SpectralProblem p({1.0, 2.0});
  const auto run = iterate(p, GradientVector{{0.0, 0.0}, 0}, StepsizeRule::bb1());
  EXPECT_EQ(run.trajectory.steps(), 0u);
  EXPECT_EQ(run.termination, Termination::Tolerance);
}

TEST(Iterate, HonoursMaxIter) {
  const auto p = generate_spectrum(5, 100.0, Spacing::Uniform, 0);
  const auto run = iterate(p, random_gradient(5, 1), StepsizeRule::sd(), RunOptions{7, 1e-300, {}});
  EXPECT_EQ(run.trajectory.steps(), 7u);
  EXPECT_EQ(run.trajectory.gradients.size(), 8u);
  EXPECT_EQ(run.trajectory.fgaps.size(), 8u);
  EXPECT_EQ(run.references.size(), 7u);
  EXPECT_EQ(run.termination, Termination::MaxIterations);
}

TEST(Iterate, RecurrenceHoldsExactly) {
  const auto p = generate_spectrum(8, 1000.0, Spacing::Log, 0);
  const auto run = iterate(p, random_gradient(8, 2), StepsizeRule::bb2(), RunOptions{200, 1e-12, {}});
  EXPECT_EQ(recurrence_residual_ulps(run.trajectory), 0.0);
}

TEST(Iterate, ValidatesOptions) {
  SpectralProblem p({1.0, 2.0});
  const GradientVector g{{1.0, 1.0}, 0};
  EXPECT_THROW(iterate(p, g, StepsizeRule::sd(), RunOptions{0, 1e-6, {}}), ConfigError);
  EXPECT_THROW(iterate(p, g, StepsizeRule::sd(), RunOptions{10, 0.0, {}}), ConfigError);
  EXPECT_THROW(iterate(p, GradientVector{{1.0}, 0}, StepsizeRule::sd()), StructuralError);
}

TEST(Iterate, BbConvergesOnIllConditionedProblem) {
  const auto p = generate_spectrum(10, 1000.0, Spacing::Log, 0);
  for (const auto& rule : {StepsizeRule::bb1(), StepsizeRule::bb2()}) {
    const auto run = iterate(p, random_gradient(10, 4), rule, RunOptions{2000, 1e-10, {}});
    EXPECT_EQ(run.termination, Termination::Tolerance) << rule.name();
  }
}

TEST(Iterate, DuplicateEigenvaluesBehaveAsMergedComponent) {
  SpectralProblem dup({1.0, 3.0, 3.0});
  SpectralProblem merged({1.0, 3.0});
  const auto a = iterate(dup, GradientVector{{1.0, 3.0, 4.0}, 0}, StepsizeRule::sd(), RunOptions{5, 1e-300, {}});
  const auto b = iterate(merged, GradientVector{{1.0, 5.0}, 0}, StepsizeRule::sd(), RunOptions{5, 1e-300, {}});
  for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(a.trajectory.stepsizes[k], b.trajectory.stepsizes[k], 1e-15);
}
