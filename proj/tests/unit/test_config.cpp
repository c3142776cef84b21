#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "gradlab/config.hpp"
#include "gradlab/errors.hpp"
#include "gradlab/io.hpp"

using namespace gradlab;
using nlohmann::json;

namespace {

json base() {
  return json::parse(R"({
    "problem": {"eigenvalues": [1, 4, 9]},
    "start": {"g0": [1, -1, 2]},
    "rule": {"kind": "bb1"}
  })");
}

std::string error_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, MinimalDocument) {
  const auto c = parse_config(base());
  EXPECT_EQ(c.problem, SpectralProblem({1.0, 4.0, 9.0}));
  EXPECT_EQ(c.g0.components, (std::vector<double>{1.0, -1.0, 2.0}));
  EXPECT_EQ(c.rule.name(), "BB1");
  EXPECT_EQ(c.name, "BB1");
  EXPECT_EQ(c.options.max_iter, 1000u);
  EXPECT_TRUE(c.checks.empty());
}

TEST(Config, SpectralX0MultipliesByLambda) {
  auto doc = base();
  doc["start"] = json{{"x0", {1.0, 1.0, 1.0}}};
  doc["problem"]["rhs"] = {0.0, 1.0, 0.0};
  EXPECT_EQ(parse_config(doc).g0.components, (std::vector<double>{1.0, 3.0, 9.0}));
}

TEST(Config, GeneratorAndRandomStart) {
  auto doc = base();
  doc["problem"] = json::parse(R"({"generator": {"n": 10, "kappa": 100, "spacing": "random", "seed": 7}})");
  doc["start"] = json::parse(R"({"random": {"seed": 3}})");
  const auto a = parse_config(doc);
  const auto b = parse_config(doc);
  EXPECT_EQ(a.problem, b.problem);
  EXPECT_EQ(a.g0, b.g0);
  EXPECT_EQ(a.problem.largest(), 100.0);
}

TEST(Config, MatrixFileWithDenseStart) {
  const auto dir = std::filesystem::temp_directory_path() / "gradlab_config_test";
  write_text_file(dir / "a.txt", "2\n2 0\n0 5\n");
  auto doc = base();
  doc["problem"] = json::parse(R"({"matrix_file": "a.txt", "rhs": [2, 5]})");
  doc["start"] = json::parse(R"({"x0": [0, 0], "coordinates": "dense"})");
  write_text_file(dir / "c.json", doc.dump());
  const auto c = load_config(dir / "c.json");
  EXPECT_EQ(c.problem, SpectralProblem({2.0, 5.0}));
  ASSERT_TRUE(c.decomposition.has_value());
  // g = A x - b = -b at x = 0, rotated into the eigenbasis.
  EXPECT_NEAR(std::abs(c.g0.components[0]), 2.0, 1e-14);
  EXPECT_NEAR(std::abs(c.g0.components[1]), 5.0, 1e-14);
  std::filesystem::remove_all(dir);
}

TEST(Config, RuleGrammar) {
  SpectralProblem p({1.0, 10.0});
  auto rule = [&](const char* text) { return parse_rule(json::parse(text), p).name(); };
  EXPECT_EQ(rule(R"({"kind":"gmr","rho":2,"r":3})"), "GMR(rho=2,r=3)");
  EXPECT_EQ(rule(R"({"kind":"const","alpha":"optimal"})"), StepsizeRule::constant(2.0 / 11.0).name());
  EXPECT_EQ(rule(R"({"kind":"cyclic","inner":"sd","c":4})"), "CYCLIC(SD,c=4)");
  EXPECT_EQ(rule(R"({"kind":"alternate","rules":["sd","mg"]})"), "ALTERNATE(SD,MG,period=1)");
  EXPECT_EQ(rule(R"({"kind":"abb","tau":0.5})"), "ADAPTIVE(BB1,BB2,tau=0.5)");
  EXPECT_EQ(rule(R"({"kind":"clamp","inner":{"kind":"bb2"},"M1":5})"), "CLAMP(BB2,M1=5)");
  const auto psi = parse_rule(
      json::parse(R"({"kind":"psi_retard","psi":{"form":"rational","num":[1,2],"den_power":2,"square":true},"r":1})"),
      p);
  const auto& kind = std::get<StepsizeRule::PsiRetard>(psi.kind());
  EXPECT_EQ(kind.psi, PsiSpec::rational({1.0, 2.0}, {0.0, 0.0, 1.0}, true));
}

TEST(Config, ChecksAndOutputs) {
  auto doc = base();
  doc["checks"] = json::parse(R"([
    {"property_b": {"M1": 9, "m": 2}},
    {"property_a": {"m": 2, "M2": 3}},
    {"property_ga": {"psi": {"form": "power", "rho": 1}}},
    {"envelope": {"variant": "thm2_retard", "r": 1}},
    {"rate": {"k0": 5}}
  ])");
  doc["outputs"] = json{{"csv", "out/t.csv"}, {"json", "/tmp/r.json"}};
  const auto c = parse_config(doc, "/base");
  ASSERT_EQ(c.checks.size(), 5u);
  EXPECT_EQ(std::get<PropertyBCheck>(c.checks[0]).M1, std::optional<double>(9.0));
  EXPECT_EQ(std::get<PropertyACheck>(c.checks[1]).M2, 3.0);
  EXPECT_EQ(std::get<PropertyGaCheck>(c.checks[2]).psi, std::optional<PsiSpec>(PsiSpec::power(1.0)));
  EXPECT_EQ(std::get<EnvelopeCheck>(c.checks[3]).r, std::optional<std::size_t>(1));
  EXPECT_EQ(std::get<RateCheck>(c.checks[4]).k0, std::optional<std::size_t>(5));
  EXPECT_EQ(*c.csv_path, std::filesystem::path("/base/out/t.csv"));
  EXPECT_EQ(*c.json_path, std::filesystem::path("/tmp/r.json"));
}

TEST(Config, ErrorsNameTheField) {
  auto doc = base();
  doc["max_iter"] = 0;
  EXPECT_NE(error_of(doc).find("max_iter"), std::string::npos);

  doc = base();
  doc["tol"] = -1;
  EXPECT_NE(error_of(doc).find("tol"), std::string::npos);

  doc = base();
  doc["problem"]["generator"] = json{{"n", 3}, {"kappa", 10}};
  EXPECT_NE(error_of(doc).find("exactly one"), std::string::npos);

  doc = base();
  doc["start"]["x0"] = {1, 2, 3};
  EXPECT_NE(error_of(doc).find("start"), std::string::npos);

  doc = base();
  doc["start"]["g0"] = {1, 2};
  EXPECT_NE(error_of(doc).find("start.g0"), std::string::npos);

  doc = base();
  doc["rule"] = json{{"kind", "gmr"}, {"rho", "two"}};
  EXPECT_NE(error_of(doc).find("rule.rho"), std::string::npos);

  doc = base();
  doc["rule"] = json::parse(R"({"kind":"cyclic","inner":{"kind":"nope"},"c":2})");
  EXPECT_NE(error_of(doc).find("rule.inner.kind"), std::string::npos);

  doc = base();
  doc["problem"]["eigenvalues"] = {3, 1};
  EXPECT_NE(error_of(doc).find("problem.eigenvalues"), std::string::npos);

  doc = base();
  doc["checks"] = json::parse(R"([{"envelope": {"variant": "thm9"}}])");
  EXPECT_NE(error_of(doc).find("checks[0].envelope.variant"), std::string::npos);

  doc = base();
  doc["checks"] = json::parse(R"([{"property_b": {"M3": 1}}])");
  EXPECT_NE(error_of(doc).find("checks[0].property_b.M3"), std::string::npos);

  doc = base();
  doc["colour"] = "blue";
  EXPECT_NE(error_of(doc).find("colour"), std::string::npos);

  doc = base();
  doc.erase("rule");
  EXPECT_NE(error_of(doc).find("rule"), std::string::npos);

  doc = base();
  doc["start"]["coordinates"] = "dense";
  EXPECT_NE(error_of(doc).find("start.coordinates"), std::string::npos);
}

TEST(Config, DuplicateEigenvaluesWarn) {
  auto doc = base();
  doc["problem"]["eigenvalues"] = {1, 4, 4};
  const auto c = parse_config(doc);
  ASSERT_EQ(c.warnings.size(), 1u);
  EXPECT_NE(c.warnings[0].find("duplicate"), std::string::npos);
}

TEST(Config, LoadErrors) {
  EXPECT_THROW(load_config("/nonexistent/config.json"), IoError);
  const auto dir = std::filesystem::temp_directory_path() / "gradlab_config_bad";
  write_text_file(dir / "bad.json", "{ not json");
  EXPECT_THROW(load_config(dir / "bad.json"), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST(Config, Startup) {
  EXPECT_EQ(parse_startup("aopt").kind, StartupPolicy::Kind::Aopt);
  EXPECT_EQ(parse_startup(json{{"const", 0.1}}).alpha, 0.1);
  EXPECT_THROW(parse_startup("bogus"), ConfigError);
}
