#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "gradlab/errors.hpp"
#include "gradlab/experiment.hpp"
#include "gradlab/io.hpp"

using namespace gradlab;
using nlohmann::json;

namespace {

ExperimentConfig config_from(const char* text) { return parse_config(json::parse(text)); }

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("gradlab_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(RunExperiment, SingleExactStep) {
  const auto report = run_experiment(config_from(R"({
    "problem": {"eigenvalues": [1, 2]}, "start": {"g0": [1, 0]}, "rule": "sd", "max_iter": 1
  })"));
  EXPECT_EQ(report.K(), 1u);
  EXPECT_EQ(report.run.trajectory.gradients.back().norm(), 0.0);
  EXPECT_TRUE(report.rate.has_value());
  EXPECT_EQ(report.rate->empirical_rate, 0.0);
}

TEST(RunExperiment, OneOutcomePerCheck) {
  const auto report = run_experiment(config_from(R"({
    "problem": {"generator": {"n": 6, "kappa": 50, "spacing": "log"}},
    "start": {"random": {"seed": 1}},
    "rule": "bb2",
    "max_iter": 100,
    "checks": [{"property_b": {}}, {"property_a": {}}, {"property_ga": {}}, {"envelope": {}},
               {"envelope": {"variant": "thm1"}}, {"rate": {}}]
  })"));
  ASSERT_EQ(report.checks.size(), 6u);
  EXPECT_TRUE(std::holds_alternative<PropertyBOutcome>(report.checks[0]));
  EXPECT_TRUE(std::holds_alternative<RateOutcome>(report.checks[5]));
  const auto& b = std::get<PropertyBOutcome>(report.checks[0]).certificate;
  EXPECT_EQ(b.psi, PsiSpec::identity());
  EXPECT_TRUE(b.pass);
  const auto& env = std::get<EnvelopeOutcome>(report.checks[3]);
  EXPECT_EQ(env.certificate.variant, EnvelopeVariant::Thm2Retard);
  EXPECT_TRUE(env.pass());
  EXPECT_TRUE(report.checks_pass());
  const auto best = report.best_theta();
  ASSERT_TRUE(best.has_value());
  EXPECT_LE(*best, 1.0 - 1.0 / 50.0);
}

TEST(RunExperiment, AutoEnvelopeFallsBackOutsideSpectrum) {
  const auto report = run_experiment(config_from(R"({
    "problem": {"eigenvalues": [1, 10]}, "start": {"g0": [1, 1]},
    "rule": {"kind": "const", "alpha": 0.05}, "max_iter": 50,
    "checks": [{"envelope": {}}]
  })"));
  const auto& env = std::get<EnvelopeOutcome>(report.checks[0]);
  EXPECT_TRUE(env.fallback_reason.has_value());
  EXPECT_EQ(env.certificate.variant, EnvelopeVariant::Cor1Multi);
  EXPECT_DOUBLE_EQ(env.certificate.theta, 1.0 - 1.0 / 20.0);
  ASSERT_FALSE(report.warnings.empty());
}

TEST(RunExperiment, PropertyBFailureGatesChecks) {
  const auto report = run_experiment(config_from(R"({
    "problem": {"eigenvalues": [1, 10]}, "start": {"g0": [1, 1]}, "rule": "sd", "max_iter": 5,
    "checks": [{"property_b": {"M1": 2}}]
  })"));
  EXPECT_FALSE(report.checks_pass());
}

TEST(Example1, ReproducesPublishedValues) {
  const auto report = example1_scenario(1.0);
  const auto& a = report.run.trajectory.stepsizes;
  ASSERT_GE(a.size(), 4u);
  EXPECT_NEAR(a[0], 0.0843, 5e-4);
  EXPECT_NEAR(a[1], 0.2958, 5e-4);
  EXPECT_NEAR(a[2], 0.7056, 5e-4);
  EXPECT_NEAR(1.0 / a[2], 1.4172, 5e-4);
  EXPECT_NEAR(1.0 / a[3], 4.8320, 5e-4);
  const auto& g = report.run.trajectory.gradients;
  const double expected[3][3] = {{0.9157, 2.0599, -2.2047}, {0.6448, -2.8148, 8.2300}, {0.1898, 13.0744, -84.6846}};
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(g[k + 1].components[i], expected[k][i], 5e-4);

  const auto& scan = std::get<PropertyAOutcome>(report.checks[0]).scan;
  bool k2 = false, k3 = false;
  for (const auto& w : scan.witnesses) {
    k2 |= w.k == 2;
    k3 |= w.k == 3;
  }
  EXPECT_TRUE(k2 && k3);
  EXPECT_TRUE(std::get<PropertyBOutcome>(report.checks[1]).certificate.pass);
  EXPECT_FALSE(std::get<PropertyGaOutcome>(report.checks[2]).scan.falsified());
  EXPECT_TRUE(report.checks_pass());
}

TEST(Example1, ScaleInvariantInEpsilon) {
  const auto a = example1_scenario(1.0);
  const auto b = example1_scenario(4.0);
  EXPECT_EQ(a.run.trajectory.stepsizes, b.run.trajectory.stepsizes);
  EXPECT_THROW(example1_config(0.0), DomainError);
}

TEST(Outputs, ByteIdenticalAcrossRuns) {
  const auto dir = scratch("determinism");
  auto doc = json::parse(R"({
    "problem": {"generator": {"n": 10, "kappa": 100, "spacing": "random", "seed": 7}},
    "start": {"random": {"seed": 7}}, "rule": "bb1",
    "checks": [{"property_b": {}}, {"envelope": {}}]
  })");
  std::string csv[2], js[2];
  for (int run = 0; run < 2; ++run) {
    doc["outputs"] = json{{"csv", (dir / ("t" + std::to_string(run) + ".csv")).string()},
                          {"json", (dir / ("r" + std::to_string(run) + ".json")).string()}};
    const auto config = parse_config(doc);
    write_outputs(config, run_experiment(config));
    csv[run] = read_text_file(*config.csv_path);
    js[run] = read_text_file(*config.json_path);
  }
  EXPECT_EQ(csv[0], csv[1]);
  EXPECT_EQ(js[0], js[1]);
  std::filesystem::remove_all(dir);
}

TEST(Outputs, CsvRoundTripsTrajectory) {
  const auto report = run_experiment(config_from(R"({
    "problem": {"generator": {"n": 5, "kappa": 1000, "spacing": "log"}},
    "start": {"random": {"seed": 2}}, "rule": "bb2", "max_iter": 50,
    "checks": [{"envelope": {}}]
  })"));
  std::istringstream in(trajectory_csv(report));
  const auto table = parse_csv(in);
  const auto& t = report.run.trajectory;
  ASSERT_EQ(table.rows.size(), t.gradients.size());
  EXPECT_EQ(table.column("env1_fgap_bound"), table.header.size() - 1);
  for (std::size_t k = 0; k < t.gradients.size(); ++k) {
    const auto& row = table.rows[k];
    if (k < t.steps()) EXPECT_EQ(row[table.column("alpha")], t.stepsizes[k]);
    else EXPECT_TRUE(std::isnan(row[table.column("alpha")]));
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(row[table.column("g_" + std::to_string(i + 1))], t.gradients[k].components[i]);
    EXPECT_EQ(row[table.column("fgap")], t.fgaps[k]);
  }
}

TEST(Outputs, LargeProblemsOmitComponents) {
  const auto report = run_experiment(config_from(R"({
    "problem": {"generator": {"n": 25, "kappa": 10}}, "start": {"random": {"seed": 2}}, "rule": "sd", "max_iter": 3
  })"));
  std::istringstream in(trajectory_csv(report));
  const auto table = parse_csv(in);
  EXPECT_EQ(table.header, (std::vector<std::string>{"k", "alpha", "g_norm", "fgap"}));
}

TEST(Outputs, ReportJsonShape) {
  const auto j = report_json(example1_scenario(1.0));
  EXPECT_EQ(j["summary"]["K"], 8);
  EXPECT_EQ(j["alpha"].size(), 8u);
  EXPECT_EQ(j["checks"].size(), 4u);
  EXPECT_EQ(j["checks"][3]["certificate"]["variant"], "THM2_RETARD");
  for (const char* key : {"variant", "theta", "sigma", "C", "audit"}) {
    EXPECT_TRUE(j["checks"][3]["certificate"].contains(key)) << key;
  }
  EXPECT_TRUE(j["pass"].get<bool>());
}

TEST(CompareRules, SdAndConstantShareWorstCaseRate) {
  const char* sd = R"({"problem": {"eigenvalues": [1, 10]}, "start": {"g0": [1, 1]},
                       "rule": "sd", "max_iter": 500, "tol": 1e-300})";
  const char* cst = R"({"problem": {"eigenvalues": [1, 10]}, "start": {"g0": [1, 1]},
                        "rule": {"kind": "const", "alpha": "optimal"}, "max_iter": 500, "tol": 1e-300})";
  const auto table = compare_rules({config_from(sd), config_from(cst)});
  ASSERT_EQ(table.rows.size(), 2u);
  for (const auto& row : table.rows) {
    EXPECT_EQ(row.iterations, 500u);
    EXPECT_NEAR(row.empirical_rate, 9.0 / 11.0, 1e-3);
  }
  EXPECT_EQ(table.rows[0].name, "SD");
  std::istringstream in(table.csv());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "rule,iterations,termination,empirical_rate,theta");
  EXPECT_NE(table.text().find("SD"), std::string::npos);
}

TEST(CompareRules, BbPairOnIllConditionedProblem) {
  auto make = [](const char* rule) {
    auto doc = json::parse(R"({"problem": {"generator": {"n": 10, "kappa": 1000, "spacing": "random", "seed": 4}},
                               "start": {"random": {"seed": 4}}, "max_iter": 1000})");
    doc["rule"] = rule;
    return parse_config(doc);
  };
  const auto table = compare_rules({make("bb1"), make("bb2")});
  for (const auto& row : table.rows) {
    ASSERT_TRUE(row.theta.has_value()) << row.name;
    EXPECT_DOUBLE_EQ(*row.theta, 1.0 - 1e-3);
  }
}

TEST(CompareRules, Preconditions) {
  const auto a = config_from(R"({"problem": {"eigenvalues": [1, 10]}, "start": {"g0": [1, 1]}, "rule": "sd"})");
  const auto b = config_from(R"({"problem": {"eigenvalues": [1, 11]}, "start": {"g0": [1, 1]}, "rule": "sd"})");
  const auto c = config_from(R"({"problem": {"eigenvalues": [1, 10]}, "start": {"g0": [1, 2]}, "rule": "sd"})");
  EXPECT_THROW(compare_rules({a}), ConfigError);
  EXPECT_THROW(compare_rules({a, b}), ConfigError);
  EXPECT_THROW(compare_rules({a, c}), ConfigError);
}
