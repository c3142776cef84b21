#include <gtest/gtest.h>

#include <cmath>

#include "gradlab/errors.hpp"
#include "gradlab/generator.hpp"
#include "gradlab/iterate.hpp"
#include "gradlab/stepsize.hpp"

using namespace gradlab;

namespace {

// Brute-force weighted quotient in long double.
long double oracle_quotient(const GradientVector& g, const SpectralProblem& p, double weight_power) {
  long double num = 0.0L, den = 0.0L;
  for (std::size_t i = 0; i < p.dimension(); ++i) {
    const long double w = std::pow(static_cast<long double>(p.eigenvalue(i)), weight_power);
    const long double c = g.components[i];
    num += w * c * c;
    den += w * p.eigenvalue(i) * c * c;
  }
  return num / den;
}

RuleState history(std::initializer_list<GradientVector> gs, std::size_t window) {
  RuleState s(window);
  for (const auto& g : gs) s.push(g);
  return s;
}

}  // namespace

TEST(Stepsize, ClosedFormsOnTwoComponents) {
  SpectralProblem p({1.0, 2.0});
  GradientVector g{{1.0, 1.0}, 0};
  EXPECT_DOUBLE_EQ(sd_stepsize(g, p), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(mg_stepsize(g, p), 3.0 / 5.0);
  EXPECT_DOUBLE_EQ(aopt_stepsize(g, p), std::sqrt(2.0 / 5.0));
  EXPECT_DOUBLE_EQ(moment_stepsize(g, p, 2.0), 5.0 / 9.0);
  EXPECT_DOUBLE_EQ(const_opt_stepsize(p), 2.0 / 3.0);
}

TEST(Stepsize, MatchesLongDoubleOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = generate_spectrum(7, 1000.0, Spacing::Random, 100 + trial);
    const auto g = random_gradient(7, 200 + trial);
    EXPECT_NEAR(sd_stepsize(g, p), static_cast<double>(oracle_quotient(g, p, 0.0)), 1e-15);
    EXPECT_NEAR(mg_stepsize(g, p), static_cast<double>(oracle_quotient(g, p, 1.0)), 1e-15);
    const double rho = rng.uniform(0.0, 3.0);
    EXPECT_NEAR(moment_stepsize(g, p, rho), static_cast<double>(oracle_quotient(g, p, rho)), 1e-14);
  }
}

TEST(Stepsize, InverseLiesInSpectrum) {
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = generate_spectrum(9, 500.0, Spacing::Log, 0);
    const auto g = random_gradient(9, trial);
    for (double a : {sd_stepsize(g, p), mg_stepsize(g, p), aopt_stepsize(g, p)}) {
      EXPECT_GE(1.0 / a, p.smallest() * (1 - 1e-15));
      EXPECT_LE(1.0 / a, p.largest() * (1 + 1e-15));
    }
  }
}

TEST(Stepsize, ZeroGradientSignalsConvergence) {
  SpectralProblem p({1.0, 2.0});
  GradientVector zero{{0.0, 0.0}, 3};
  EXPECT_THROW(sd_stepsize(zero, p), ConvergenceSignal);
  EXPECT_THROW(mg_stepsize(zero, p), ConvergenceSignal);
  EXPECT_THROW(aopt_stepsize(zero, p), ConvergenceSignal);
}

TEST(Stepsize, DimensionMismatch) {
  SpectralProblem p({1.0, 2.0});
  EXPECT_THROW(sd_stepsize(GradientVector{{1.0}, 0}, p), StructuralError);
}

TEST(StepsizeRule, Windows) {
  EXPECT_EQ(StepsizeRule::sd().window(), 1u);
  EXPECT_EQ(StepsizeRule::bb1().window(), 2u);
  EXPECT_EQ(StepsizeRule::gmr(2.0, 3).window(), 4u);
  EXPECT_EQ(StepsizeRule::cyclic(StepsizeRule::sd(), 4).window(), 4u);
  EXPECT_EQ(StepsizeRule::cyclic(StepsizeRule::bb1(), 3).window(), 4u);
  EXPECT_EQ(StepsizeRule::alternate(StepsizeRule::sd(), StepsizeRule::gmr(0.0, 2)).window(), 3u);
  EXPECT_EQ(StepsizeRule::adaptive(StepsizeRule::bb1(), StepsizeRule::bb2()).window(), 2u);
  EXPECT_EQ(StepsizeRule::clamped(StepsizeRule::bb2(), 5.0).window(), 2u);
  EXPECT_EQ(StepsizeRule::constant(0.1).window(), 1u);
}

TEST(StepsizeRule, FactoriesValidate) {
  EXPECT_THROW(StepsizeRule::constant(0.0), ConfigError);
  EXPECT_THROW(StepsizeRule::cyclic(StepsizeRule::sd(), 0), ConfigError);
  EXPECT_THROW(StepsizeRule::alternate(StepsizeRule::sd(), StepsizeRule::mg(), 0), ConfigError);
  EXPECT_THROW(StepsizeRule::adaptive(StepsizeRule::bb1(), StepsizeRule::bb2(), -1.0), ConfigError);
  EXPECT_THROW(StepsizeRule::gmr(-1.0, 1), ConfigError);
}

TEST(StepsizeRule, NaturalWeights) {
  EXPECT_EQ(*StepsizeRule::bb1().natural_weight(), PsiSpec::identity());
  EXPECT_EQ(*StepsizeRule::bb2().natural_weight(), PsiSpec::power(1.0));
  EXPECT_EQ(*StepsizeRule::gmr(2.0, 1).natural_weight(), PsiSpec::power(2.0));
  EXPECT_FALSE(StepsizeRule::constant(0.1).natural_weight().has_value());
}

TEST(StepsizeEngine, RetardedRulesUseOlderGradient) {
  SpectralProblem p({1.0, 3.0, 9.0});
  const GradientVector g0{{1.0, -1.0, 0.5}, 0};
  const GradientVector g1{{0.2, 0.4, -0.9}, 1};
  const auto s = history({g0, g1}, 2);
  const auto bb1 = rule_stepsize(s, StepsizeRule::bb1(), p);
  EXPECT_EQ(bb1.alpha, sd_stepsize(g0, p));
  EXPECT_EQ(bb1.reference, 0u);
  EXPECT_EQ(rule_stepsize(s, StepsizeRule::bb2(), p).alpha, mg_stepsize(g0, p));
  EXPECT_EQ(rule_stepsize(s, StepsizeRule::gmr(0.0, 1), p).alpha, sd_stepsize(g0, p));
  EXPECT_EQ(rule_stepsize(s, StepsizeRule::gmr(1.0, 1), p).alpha, mg_stepsize(g0, p));
  EXPECT_EQ(rule_stepsize(s, StepsizeRule::gmr(1.0, 0), p).alpha, mg_stepsize(g1, p));
  EXPECT_EQ(rule_stepsize(s, StepsizeRule::psi_retard(PsiSpec::identity(), 1), p).alpha, sd_stepsize(g0, p));
}

TEST(StepsizeEngine, StartupPolicies) {
  SpectralProblem p({1.0, 4.0});
  const GradientVector g0{{1.0, 2.0}, 0};
  const auto s = history({g0}, 2);
  EXPECT_EQ(rule_stepsize(s, StepsizeRule::bb1(), p).alpha, sd_stepsize(g0, p));
  EXPECT_EQ(rule_stepsize(s, StepsizeRule::bb1(), p, {StartupPolicy::Kind::Aopt, 0.0}).alpha,
            aopt_stepsize(g0, p));
  EXPECT_EQ(rule_stepsize(s, StepsizeRule::bb1(), p, {StartupPolicy::Kind::Constant, 0.25}).alpha, 0.25);
  EXPECT_THROW(rule_stepsize(s, StepsizeRule::bb1(), p, {StartupPolicy::Kind::None, 0.0}), SequencingError);
}

TEST(StepsizeEngine, CyclicReusesBlockStart) {
  SpectralProblem p({1.0, 5.0});
  const auto run = iterate(p, GradientVector{{1.0, 1.0}, 0}, StepsizeRule::cyclic(StepsizeRule::sd(), 3),
                           RunOptions{9, 1e-300, {}});
  const auto& t = run.trajectory;
  ASSERT_EQ(t.steps(), 9u);
  for (std::size_t k = 0; k < 9; ++k) {
    const std::size_t k0 = k - k % 3;
    EXPECT_EQ(t.stepsizes[k], sd_stepsize(t.gradients[k0], p)) << k;
    EXPECT_EQ(run.references[k], k0);
  }
}

TEST(StepsizeEngine, AlternateSwitchesByPeriod) {
  SpectralProblem p({1.0, 5.0, 7.0});
  const auto rule = StepsizeRule::alternate(StepsizeRule::sd(), StepsizeRule::mg(), 2);
  const auto run = iterate(p, GradientVector{{1.0, 1.0, 1.0}, 0}, rule, RunOptions{8, 1e-300, {}});
  const auto& t = run.trajectory;
  for (std::size_t k = 0; k < t.steps(); ++k) {
    const bool first = (k / 2) % 2 == 0;
    const double expected = first ? sd_stepsize(t.gradients[k], p) : mg_stepsize(t.gradients[k], p);
    EXPECT_EQ(t.stepsizes[k], expected) << k;
  }
}

TEST(StepsizeEngine, AdaptiveSwitchesOnRatio) {
  SpectralProblem p({1.0, 10.0});
  const GradientVector g0{{1.0, 1.0}, 0};
  const GradientVector g1{{0.5, -2.0}, 1};
  const auto s = history({g0, g1}, 2);
  const double bb1 = sd_stepsize(g0, p), bb2 = mg_stepsize(g0, p);
  const double ratio = bb2 / bb1;
  const auto low = rule_stepsize(s, StepsizeRule::adaptive(StepsizeRule::bb1(), StepsizeRule::bb2(), ratio * 1.01), p);
  EXPECT_EQ(low.alpha, bb2);
  const auto high = rule_stepsize(s, StepsizeRule::adaptive(StepsizeRule::bb1(), StepsizeRule::bb2(), ratio * 0.99), p);
  EXPECT_EQ(high.alpha, bb1);
}

TEST(StepsizeEngine, ClampKeepsInverseInRange) {
  SpectralProblem p({1.0, 10.0});
  const GradientVector g{{0.0, 1.0}, 0};
  const auto s = history({g}, 1);
  // SD gives 1/alpha = 10; clamped to 4.
  EXPECT_DOUBLE_EQ(rule_stepsize(s, StepsizeRule::clamped(StepsizeRule::sd(), 4.0), p).alpha, 0.25);
  EXPECT_DOUBLE_EQ(rule_stepsize(s, StepsizeRule::clamped(StepsizeRule::constant(5.0), 4.0), p).alpha, 1.0);
}

TEST(StepsizeEngine, ScaleInvarianceIsExact) {
  const auto p = generate_spectrum(6, 50.0, Spacing::Log, 0);
  const auto g0 = random_gradient(6, 5);
  GradientVector scaled = g0;
  for (auto& c : scaled.components) c *= 8.0;
  const std::vector<StepsizeRule> rules{StepsizeRule::sd(),        StepsizeRule::mg(),
                                        StepsizeRule::aopt(),      StepsizeRule::bb1(),
                                        StepsizeRule::bb2(),       StepsizeRule::gmr(2.0, 2),
                                        StepsizeRule::adaptive(StepsizeRule::bb1(), StepsizeRule::bb2())};
  for (const auto& rule : rules) {
    const auto a = iterate(p, g0, rule, RunOptions{40, 1e-300, {}});
    const auto b = iterate(p, scaled, rule, RunOptions{40, 1e-300, {}});
    EXPECT_EQ(a.trajectory.stepsizes, b.trajectory.stepsizes) << rule.name();
  }
}

TEST(RuleState, EnforcesOrderAndWindow) {
  RuleState s(2);
  s.push(GradientVector{{1.0}, 0});
  EXPECT_THROW(s.push(GradientVector{{1.0}, 2}), SequencingError);
  s.push(GradientVector{{1.0}, 1});
  s.push(GradientVector{{1.0}, 2});
  EXPECT_EQ(s.size(), 2u);
  EXPECT_FALSE(s.holds(0));
  EXPECT_THROW(s.at(0), SequencingError);
  EXPECT_EQ(s.current(), 2u);
}
