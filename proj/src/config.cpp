#include "gradlab/config.hpp"

#include <cmath>
#include <set>

#include "gradlab/errors.hpp"
#include "gradlab/generator.hpp"
#include "gradlab/io.hpp"

namespace gradlab {

namespace {

using nlohmann::json;

std::string join(const std::string& field, const std::string& key) {
  return field.empty() ? key : field + "." + key;
}

void require_object(const json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError(field + ": expected an object");
}

void reject_unknown(const json& j, const std::string& field, std::initializer_list<const char*> allowed) {
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!keys.count(item.key())) throw ConfigError(join(field, item.key()) + ": unknown field");
  }
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(field + ": expected a finite number");
  return v;
}

double positive(const json& j, const std::string& field) {
  const double v = number(j, field);
  if (!(v > 0.0)) throw ConfigError(field + ": must be positive");
  return v;
}

std::size_t count(const json& j, const std::string& field) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) throw ConfigError(field + ": expected an integer");
  const auto v = j.get<long long>();
  if (v < 0) throw ConfigError(field + ": must be non-negative");
  return static_cast<std::size_t>(v);
}

std::size_t positive_count(const json& j, const std::string& field) {
  const std::size_t v = count(j, field);
  if (v == 0) throw ConfigError(field + ": must be >= 1");
  return v;
}

std::vector<double> numbers(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::size_t> counts(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field + ": expected an array of integers");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(count(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

std::string text(const json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field + ": expected a string");
  return j.get<std::string>();
}

template <class T, class F>
std::optional<T> optional_field(const json& j, const char* key, const std::string& field, F read) {
  if (!j.contains(key)) return std::nullopt;
  return read(j.at(key), join(field, key));
}

// Wraps library errors raised while building a sub-object so the message
// names the config field.
template <class F>
auto with_field(const std::string& field, F build) {
  try {
    return build();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(field + ": " + e.what());
  }
}

SpectralProblem parse_problem(const json& spec, const std::filesystem::path& base_dir,
                              std::optional<SpectralDecomposition>& decomposition, std::vector<double>& rhs) {
  const std::string field = "problem";
  require_object(spec, field);
  reject_unknown(spec, field, {"eigenvalues", "matrix_file", "generator", "rhs"});
  const int sources = spec.contains("eigenvalues") + spec.contains("matrix_file") + spec.contains("generator");
  if (sources != 1) {
    throw ConfigError("problem: exactly one of eigenvalues, matrix_file or generator is required");
  }
  if (spec.contains("rhs")) rhs = numbers(spec.at("rhs"), "problem.rhs");

  if (spec.contains("eigenvalues")) {
    auto values = numbers(spec.at("eigenvalues"), "problem.eigenvalues");
    return with_field("problem.eigenvalues", [&] { return SpectralProblem(std::move(values)); });
  }
  if (spec.contains("matrix_file")) {
    std::filesystem::path path = text(spec.at("matrix_file"), "problem.matrix_file");
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    DenseProblem dense = read_matrix_file(path);
    if (!rhs.empty()) dense.rhs = rhs;
    decomposition = with_field("problem.matrix_file", [&] { return spectralize(dense); });
    return decomposition->problem();
  }
  const json& gen = spec.at("generator");
  require_object(gen, "problem.generator");
  reject_unknown(gen, "problem.generator", {"n", "kappa", "spacing", "seed"});
  if (!gen.contains("n") || !gen.contains("kappa")) {
    throw ConfigError("problem.generator: n and kappa are required");
  }
  const std::size_t n = positive_count(gen.at("n"), "problem.generator.n");
  const double kappa = number(gen.at("kappa"), "problem.generator.kappa");
  const Spacing spacing =
      gen.contains("spacing") ? parse_spacing(text(gen.at("spacing"), "problem.generator.spacing")) : Spacing::Log;
  const std::size_t seed = gen.contains("seed") ? count(gen.at("seed"), "problem.generator.seed") : 0;
  return generate_spectrum(n, kappa, spacing, seed);
}

GradientVector parse_start(const json& spec, const SpectralProblem& problem,
                           const std::optional<SpectralDecomposition>& decomposition,
                           const std::vector<double>& rhs) {
  const std::string field = "start";
  require_object(spec, field);
  reject_unknown(spec, field, {"g0", "x0", "random", "coordinates"});
  const int sources = spec.contains("g0") + spec.contains("x0") + spec.contains("random");
  if (sources != 1) throw ConfigError("start: exactly one of g0, x0 or random is required");
  const std::string coordinates =
      spec.contains("coordinates") ? text(spec.at("coordinates"), "start.coordinates") : "spectral";
  if (coordinates != "spectral" && coordinates != "dense") {
    throw ConfigError("start.coordinates: expected 'spectral' or 'dense'");
  }
  if (coordinates == "dense" && !decomposition) {
    throw ConfigError("start.coordinates: dense coordinates need a matrix_file problem");
  }
  const std::size_t n = problem.dimension();

  if (spec.contains("random")) {
    const json& r = spec.at("random");
    require_object(r, "start.random");
    reject_unknown(r, "start.random", {"seed"});
    const std::size_t seed = r.contains("seed") ? count(r.at("seed"), "start.random.seed") : 0;
    return random_gradient(n, seed);
  }

  const bool is_gradient = spec.contains("g0");
  const std::string key = is_gradient ? "g0" : "x0";
  auto values = numbers(spec.at(key), "start." + key);
  if (values.size() != n) {
    throw ConfigError("start." + key + ": expected " + std::to_string(n) + " components, got " +
                      std::to_string(values.size()));
  }
  if (coordinates == "dense") {
    if (is_gradient) return GradientVector{decomposition->to_spectral(values), 0};
    return decomposition->gradient_at(values);
  }
  if (is_gradient) return GradientVector{std::move(values), 0};
  if (decomposition) return decomposition->gradient_at(decomposition->from_spectral(values));
  // Spectral x0: g = Lambda x - b with b given in spectral coordinates.
  if (!rhs.empty() && rhs.size() != n) throw ConfigError("problem.rhs: expected " + std::to_string(n) + " entries");
  const auto lambda = problem.eigenvalues();
  for (std::size_t i = 0; i < n; ++i) values[i] = lambda[i] * values[i] - (rhs.empty() ? 0.0 : rhs[i]);
  return GradientVector{std::move(values), 0};
}

CheckSpec parse_check(const json& spec, const std::string& field) {
  require_object(spec, field);
  if (spec.size() != 1) throw ConfigError(field + ": expected a single-key object naming the check");
  const std::string kind = spec.begin().key();
  const json& body = spec.begin().value();
  const std::string f = join(field, kind);
  require_object(body, f);

  if (kind == "property_b") {
    reject_unknown(body, f, {"M1", "m", "psi"});
    PropertyBCheck c;
    c.M1 = optional_field<double>(body, "M1", f, positive);
    c.m = optional_field<std::size_t>(body, "m", f, positive_count);
    c.psi = optional_field<PsiSpec>(body, "psi", f, parse_psi);
    return c;
  }
  if (kind == "property_a") {
    reject_unknown(body, f, {"m", "M2", "l"});
    PropertyACheck c;
    c.m = optional_field<std::size_t>(body, "m", f, positive_count);
    if (body.contains("M2")) c.M2 = positive(body.at("M2"), f + ".M2");
    if (body.contains("l")) c.l = counts(body.at("l"), f + ".l");
    return c;
  }
  if (kind == "property_ga") {
    reject_unknown(body, f, {"m", "M2", "l", "psi"});
    PropertyGaCheck c;
    c.psi = optional_field<PsiSpec>(body, "psi", f, parse_psi);
    c.m = optional_field<std::size_t>(body, "m", f, positive_count);
    if (body.contains("M2")) c.M2 = positive(body.at("M2"), f + ".M2");
    if (body.contains("l")) c.l = counts(body.at("l"), f + ".l");
    return c;
  }
  if (kind == "envelope") {
    reject_unknown(body, f, {"variant", "psi", "M1", "m", "r", "windows", "M2"});
    EnvelopeCheck c;
    if (body.contains("variant")) c.variant = text(body.at("variant"), f + ".variant");
    static const std::set<std::string> variants{"auto",        "thm1",        "cor1_retard", "cor1_multi",
                                                "thm2_retard", "thm2_multi", "ga"};
    if (!variants.count(c.variant)) throw ConfigError(f + ".variant: unknown variant '" + c.variant + "'");
    c.psi = optional_field<PsiSpec>(body, "psi", f, parse_psi);
    c.M1 = optional_field<double>(body, "M1", f, positive);
    c.m = optional_field<std::size_t>(body, "m", f, positive_count);
    c.r = optional_field<std::size_t>(body, "r", f, count);
    if (body.contains("windows")) c.windows = counts(body.at("windows"), f + ".windows");
    if (body.contains("M2")) c.M2 = positive(body.at("M2"), f + ".M2");
    return c;
  }
  if (kind == "rate") {
    reject_unknown(body, f, {"k0", "K"});
    RateCheck c;
    c.k0 = optional_field<std::size_t>(body, "k0", f, count);
    c.K = optional_field<std::size_t>(body, "K", f, positive_count);
    return c;
  }
  throw ConfigError(field + ": unknown check '" + kind + "'");
}

}  // namespace

PsiSpec parse_psi(const json& spec, const std::string& field) {
  if (spec.is_string()) {
    if (spec.get<std::string>() == "identity") return PsiSpec::identity();
    throw ConfigError(field + ": unknown psi '" + spec.get<std::string>() + "'");
  }
  require_object(spec, field);
  if (!spec.contains("form")) throw ConfigError(field + ".form: required");
  const std::string form = text(spec.at("form"), field + ".form");
  return with_field(field, [&]() -> PsiSpec {
    if (form == "identity") {
      reject_unknown(spec, field, {"form"});
      return PsiSpec::identity();
    }
    if (form == "power") {
      reject_unknown(spec, field, {"form", "rho"});
      if (!spec.contains("rho")) throw ConfigError(field + ".rho: required");
      return PsiSpec::power(number(spec.at("rho"), field + ".rho"));
    }
    if (form == "rational") {
      reject_unknown(spec, field, {"form", "num", "den", "den_power", "square"});
      if (!spec.contains("num")) throw ConfigError(field + ".num: required");
      auto num = numbers(spec.at("num"), field + ".num");
      std::vector<double> den;
      if (spec.contains("den") == spec.contains("den_power")) {
        throw ConfigError(field + ": exactly one of den or den_power is required");
      }
      if (spec.contains("den")) {
        den = numbers(spec.at("den"), field + ".den");
      } else {
        den.assign(count(spec.at("den_power"), field + ".den_power") + 1, 0.0);
        den.back() = 1.0;
      }
      bool square = false;
      if (spec.contains("square")) {
        if (!spec.at("square").is_boolean()) throw ConfigError(field + ".square: expected a boolean");
        square = spec.at("square").get<bool>();
      }
      return PsiSpec::rational(std::move(num), std::move(den), square);
    }
    if (form == "tabulated") {
      reject_unknown(spec, field, {"form", "values"});
      if (!spec.contains("values")) throw ConfigError(field + ".values: required");
      return PsiSpec::tabulated(numbers(spec.at("values"), field + ".values"));
    }
    throw ConfigError(field + ".form: unknown form '" + form + "'");
  });
}

StepsizeRule parse_rule(const json& spec, const SpectralProblem& problem, const std::string& field) {
  if (spec.is_string()) return parse_rule(json{{"kind", spec}}, problem, field);
  require_object(spec, field);
  if (!spec.contains("kind")) throw ConfigError(field + ".kind: required");
  const std::string kind = text(spec.at("kind"), field + ".kind");
  auto retard = [&](std::size_t fallback) {
    return spec.contains("r") ? count(spec.at("r"), field + ".r") : fallback;
  };
  auto child = [&](const char* key) {
    if (!spec.contains(key)) throw ConfigError(join(field, key) + ": required");
    return parse_rule(spec.at(key), problem, join(field, key));
  };

  return with_field(field, [&]() -> StepsizeRule {
    if (kind == "sd" || kind == "mg" || kind == "aopt" || kind == "bb1" || kind == "bb2") {
      reject_unknown(spec, field, {"kind"});
      if (kind == "sd") return StepsizeRule::sd();
      if (kind == "mg") return StepsizeRule::mg();
      if (kind == "aopt") return StepsizeRule::aopt();
      if (kind == "bb1") return StepsizeRule::bb1();
      return StepsizeRule::bb2();
    }
    if (kind == "gmr") {
      reject_unknown(spec, field, {"kind", "rho", "r"});
      const double rho = spec.contains("rho") ? number(spec.at("rho"), field + ".rho") : 0.0;
      return StepsizeRule::gmr(rho, retard(1));
    }
    if (kind == "psi_retard") {
      reject_unknown(spec, field, {"kind", "psi", "r"});
      if (!spec.contains("psi")) throw ConfigError(field + ".psi: required");
      return StepsizeRule::psi_retard(parse_psi(spec.at("psi"), field + ".psi"), retard(1));
    }
    if (kind == "const") {
      reject_unknown(spec, field, {"kind", "alpha"});
      if (!spec.contains("alpha")) throw ConfigError(field + ".alpha: required");
      const json& a = spec.at("alpha");
      if (a.is_string()) {
        if (a.get<std::string>() != "optimal") throw ConfigError(field + ".alpha: expected a number or 'optimal'");
        return StepsizeRule::constant(const_opt_stepsize(problem));
      }
      return StepsizeRule::constant(positive(a, field + ".alpha"));
    }
    if (kind == "cyclic") {
      reject_unknown(spec, field, {"kind", "inner", "c"});
      if (!spec.contains("c")) throw ConfigError(field + ".c: required");
      return StepsizeRule::cyclic(child("inner"), positive_count(spec.at("c"), field + ".c"));
    }
    if (kind == "alternate") {
      reject_unknown(spec, field, {"kind", "rules", "period"});
      if (!spec.contains("rules") || !spec.at("rules").is_array() || spec.at("rules").size() != 2) {
        throw ConfigError(field + ".rules: expected an array of two rules");
      }
      const std::size_t period = spec.contains("period") ? positive_count(spec.at("period"), field + ".period") : 1;
      return StepsizeRule::alternate(parse_rule(spec.at("rules")[0], problem, field + ".rules[0]"),
                                     parse_rule(spec.at("rules")[1], problem, field + ".rules[1]"), period);
    }
    if (kind == "adaptive" || kind == "abb") {
      const double tau = spec.contains("tau") ? positive(spec.at("tau"), field + ".tau") : 0.8;
      if (kind == "abb") {
        reject_unknown(spec, field, {"kind", "tau"});
        return StepsizeRule::adaptive(StepsizeRule::bb1(), StepsizeRule::bb2(), tau);
      }
      reject_unknown(spec, field, {"kind", "long", "short", "tau"});
      return StepsizeRule::adaptive(child("long"), child("short"), tau);
    }
    if (kind == "clamp") {
      reject_unknown(spec, field, {"kind", "inner", "M1"});
      if (!spec.contains("M1")) throw ConfigError(field + ".M1: required");
      return StepsizeRule::clamped(child("inner"), positive(spec.at("M1"), field + ".M1"));
    }
    throw ConfigError(field + ".kind: unknown rule kind '" + kind + "'");
  });
}

StartupPolicy parse_startup(const json& spec) {
  if (spec.is_string()) {
    const auto s = spec.get<std::string>();
    if (s == "sd") return {StartupPolicy::Kind::Sd, 0.0};
    if (s == "aopt") return {StartupPolicy::Kind::Aopt, 0.0};
    if (s == "none") return {StartupPolicy::Kind::None, 0.0};
    throw ConfigError("startup: expected 'sd', 'aopt', 'none' or {\"const\": alpha}");
  }
  require_object(spec, "startup");
  reject_unknown(spec, "startup", {"const"});
  if (!spec.contains("const")) throw ConfigError("startup: expected 'sd', 'aopt', 'none' or {\"const\": alpha}");
  return {StartupPolicy::Kind::Constant, positive(spec.at("const"), "startup.const")};
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  require_object(doc, "config");
  reject_unknown(doc, "", {"name", "problem", "start", "rule", "startup", "max_iter", "tol", "checks", "outputs"});
  for (const char* key : {"problem", "start", "rule"}) {
    if (!doc.contains(key)) throw ConfigError(std::string(key) + ": required");
  }

  std::optional<SpectralDecomposition> decomposition;
  std::vector<double> rhs;
  SpectralProblem problem = parse_problem(doc.at("problem"), base_dir, decomposition, rhs);
  GradientVector g0 = parse_start(doc.at("start"), problem, decomposition, rhs);
  StepsizeRule rule = parse_rule(doc.at("rule"), problem);

  RunOptions options;
  if (doc.contains("max_iter")) options.max_iter = positive_count(doc.at("max_iter"), "max_iter");
  if (doc.contains("tol")) options.tol = positive(doc.at("tol"), "tol");
  if (doc.contains("startup")) options.startup = parse_startup(doc.at("startup"));

  std::vector<CheckSpec> checks;
  if (doc.contains("checks")) {
    const json& list = doc.at("checks");
    if (!list.is_array()) throw ConfigError("checks: expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      checks.push_back(parse_check(list[i], "checks[" + std::to_string(i) + "]"));
    }
  }

  std::optional<std::filesystem::path> csv_path;
  std::optional<std::filesystem::path> json_path;
  if (doc.contains("outputs")) {
    const json& out = doc.at("outputs");
    require_object(out, "outputs");
    reject_unknown(out, "outputs", {"csv", "json"});
    auto resolve = [&](const char* key) {
      std::filesystem::path p = text(out.at(key), std::string("outputs.") + key);
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      return p;
    };
    if (out.contains("csv")) csv_path = resolve("csv");
    if (out.contains("json")) json_path = resolve("json");
  }

  std::vector<std::string> warnings;
  if (problem.has_duplicates()) warnings.emplace_back("duplicate eigenvalues: components with equal lambda merge");

  const std::string name = doc.contains("name") ? text(doc.at("name"), "name") : rule.name();
  return ExperimentConfig{name,
                          std::move(problem),
                          std::move(decomposition),
                          std::move(g0),
                          std::move(rule),
                          options,
                          std::move(checks),
                          std::move(csv_path),
                          std::move(json_path),
                          std::move(warnings)};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string content = read_text_file(path);
  json doc;
  try {
    doc = json::parse(content);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

}  // namespace gradlab
