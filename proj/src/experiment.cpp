#include "gradlab/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "gradlab/errors.hpp"
#include "gradlab/io.hpp"

namespace gradlab {

namespace {

using nlohmann::ordered_json;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Retard of rules that always reference g_{k-r}; nullopt for the rest.
std::optional<std::size_t> fixed_retard(const StepsizeRule& rule) {
  using R = StepsizeRule;
  return std::visit(Overloaded{
                        [](const R::Sd&) -> std::optional<std::size_t> { return 0; },
                        [](const R::Mg&) -> std::optional<std::size_t> { return 0; },
                        [](const R::Aopt&) -> std::optional<std::size_t> { return 0; },
                        [](const R::Bb1&) -> std::optional<std::size_t> { return 1; },
                        [](const R::Bb2&) -> std::optional<std::size_t> { return 1; },
                        [](const R::Gmr& r) -> std::optional<std::size_t> { return r.retard; },
                        [](const R::PsiRetard& r) -> std::optional<std::size_t> { return r.retard; },
                        [](const R::Clamped& r) { return fixed_retard(*r.inner); },
                        [](const auto&) -> std::optional<std::size_t> { return std::nullopt; },
                    },
                    rule.kind());
}

// Identity whenever it certifies every step (startup included); otherwise
// the weight the rule is built on.
PsiSpec default_psi(const ExperimentConfig& config) {
  const auto startup = config.options.startup.kind;
  const bool startup_ok = startup == StartupPolicy::Kind::Sd || startup == StartupPolicy::Kind::Aopt;
  if (config.rule.sd_dominated() && startup_ok) return PsiSpec::identity();
  return config.rule.natural_weight().value_or(PsiSpec::identity());
}

double max_inverse_alpha(const GradientTrajectory& traj) {
  double out = traj.problem.smallest();
  for (double a : traj.stepsizes) out = std::max(out, 1.0 / a);
  return out;
}

std::size_t default_window(const ExperimentConfig& config, const GradientTrajectory& traj) {
  return std::max<std::size_t>(1, std::min(config.rule.window(), traj.steps()));
}

EnvelopeOutcome run_envelope(const EnvelopeCheck& check, const ExperimentConfig& config,
                             const GradientTrajectory& traj) {
  const PsiSpec psi = check.psi.value_or(default_psi(config));
  const double M1 = check.M1.value_or(max_inverse_alpha(traj));
  const std::size_t m = check.m.value_or(config.rule.window());
  const std::vector<std::size_t> windows = check.windows.empty() ? std::vector<std::size_t>{m} : check.windows;
  auto retard = [&]() -> std::size_t {
    if (check.r) return *check.r;
    if (auto r = fixed_retard(config.rule)) return *r;
    throw ConfigError("envelope.r: required for rule " + config.rule.name());
  };

  EnvelopeOutcome out;
  out.requested = check.variant;
  const std::string& v = check.variant;
  if (v == "thm1") {
    out.certificate = envelope_thm1(traj, psi, M1, m);
  } else if (v == "cor1_retard") {
    out.certificate = envelope_cor1_retard(traj, psi, M1, retard());
  } else if (v == "cor1_multi") {
    out.certificate = envelope_cor1_multi(traj, psi, M1, windows);
  } else if (v == "thm2_retard") {
    out.certificate = envelope_thm2_retard(traj, psi, retard());
  } else if (v == "thm2_multi") {
    out.certificate = envelope_thm2_multi(traj, psi, windows);
  } else if (v == "ga") {
    out.certificate = envelope_ga(traj, psi, M1, check.M2, m);
  } else {
    const auto r = check.r ? check.r : fixed_retard(config.rule);
    try {
      out.certificate = r ? envelope_thm2_retard(traj, psi, *r) : envelope_thm2_multi(traj, psi, windows);
    } catch (const DomainError& e) {
      out.fallback_reason = e.what();
      out.certificate = r ? envelope_cor1_retard(traj, psi, M1, *r) : envelope_cor1_multi(traj, psi, M1, windows);
    }
  }
  out.derived = derived_bounds(out.certificate, traj);
  return out;
}

RateEstimate default_rate(const GradientTrajectory& traj) {
  const std::size_t K = traj.steps();
  const std::size_t k0 = std::min(default_rate_start(K), K - 1);
  try {
    return estimate_rate(traj, k0, K);
  } catch (const ConvergenceSignal&) {
    return RateEstimate{0.0, k0, K, std::nullopt};
  }
}

ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

template <class T>
ordered_json optional_number(const std::optional<T>& v) {
  if (!v) return nullptr;
  return number(static_cast<double>(*v));
}

ordered_json numbers(const std::vector<double>& values) {
  ordered_json out = ordered_json::array();
  for (double v : values) out.push_back(number(v));
  return out;
}

ordered_json audit_json(const EnvelopeAudit& a) {
  return ordered_json{{"min_slack", number(a.min_slack)},
                      {"argmin_k", a.argmin_k},
                      {"argmin_i", a.argmin_i},
                      {"cells", a.cells},
                      {"pass", a.pass}};
}

ordered_json scan_json(const char* type, const PropertyScan& s) {
  ordered_json w = ordered_json::array();
  for (const auto& x : s.witnesses) {
    w.push_back(ordered_json{{"k", x.k},
                             {"l", x.l},
                             {"epsilon", number(x.epsilon)},
                             {"M2_sup", number(x.M2_sup)},
                             {"inverse_alpha", number(x.inverse_alpha)},
                             {"threshold", number(x.threshold)}});
  }
  return ordered_json{{"type", type},
                      {"psi", s.psi.describe()},
                      {"m", s.m},
                      {"M2", number(s.M2)},
                      {"lambda1_normalized", s.lambda1_normalized},
                      {"falsified", s.falsified()},
                      {"witnesses", std::move(w)}};
}

ordered_json rate_json(const RateEstimate& r) {
  return ordered_json{{"empirical_rate", number(r.empirical_rate)},
                      {"k0", r.k0},
                      {"K", r.K},
                      {"theoretical_rate", optional_number(r.theoretical_rate)}};
}

ordered_json check_json(const CheckOutcome& outcome) {
  return std::visit(
      Overloaded{
          [](const PropertyBOutcome& o) {
            const auto& c = o.certificate;
            ordered_json steps = ordered_json::array();
            for (const auto& s : c.steps) {
              steps.push_back(ordered_json{{"k", s.k},
                                           {"inverse_alpha", number(s.inverse_alpha)},
                                           {"pass_range", s.pass_range},
                                           {"witness", optional_number(s.witness)},
                                           {"quotient", number(s.quotient)}});
            }
            return ordered_json{{"type", "property_b"},
                                {"psi", c.psi.describe()},
                                {"M1", number(c.M1)},
                                {"m", c.m},
                                {"lambda1_normalized", c.lambda1_normalized},
                                {"pass", c.pass},
                                {"first_failure", optional_number(c.first_failure)},
                                {"steps", std::move(steps)}};
          },
          [](const PropertyAOutcome& o) { return scan_json("property_a", o.scan); },
          [](const PropertyGaOutcome& o) { return scan_json("property_ga", o.scan); },
          [](const EnvelopeOutcome& o) {
            ordered_json j{{"type", "envelope"}, {"requested", o.requested}};
            j["certificate"] = certificate_json(o.certificate);
            j["fallback_reason"] = o.fallback_reason ? ordered_json(*o.fallback_reason) : ordered_json(nullptr);
            j["iterate_audit"] = audit_json(o.derived.iterate_audit);
            j["fgap_audit"] = audit_json(o.derived.fgap_audit);
            j["pass"] = o.pass();
            return j;
          },
          [](const RateOutcome& o) {
            ordered_json j{{"type", "rate"}};
            j.update(rate_json(o.estimate));
            return j;
          },
      },
      outcome);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

bool RunReport::checks_pass() const {
  for (const auto& c : checks) {
    if (const auto* b = std::get_if<PropertyBOutcome>(&c); b && !b->certificate.pass) return false;
    if (const auto* e = std::get_if<EnvelopeOutcome>(&c); e && !e->pass()) return false;
  }
  return true;
}

std::optional<double> RunReport::best_theta() const {
  std::optional<double> best;
  for (const auto& c : checks) {
    if (const auto* e = std::get_if<EnvelopeOutcome>(&c); e && e->pass()) {
      if (!best || e->certificate.theta < *best) best = e->certificate.theta;
    }
  }
  return best;
}

RunReport run_experiment(const ExperimentConfig& config) {
  RunReport report{config.name, iterate(config.problem, config.g0, config.rule, config.options), {}, std::nullopt,
                   config.warnings};
  const GradientTrajectory& traj = report.run.trajectory;
  const bool normalized = config.problem.smallest() == 1.0;

  if (!config.checks.empty() && traj.steps() == 0) {
    throw StructuralError("checks need at least one step; g0 already meets the tolerance");
  }

  for (const auto& spec : config.checks) {
    std::visit(Overloaded{
                   [&](const PropertyBCheck& c) {
                     PropertyBOutcome o{certify_property_b(traj, report.run.references,
                                                           c.psi.value_or(default_psi(config)),
                                                           c.M1.value_or(config.problem.largest()),
                                                           c.m.value_or(config.rule.window()))};
                     for (const auto& s : o.certificate.steps) {
                       if (!s.pass_range) {
                         report.warnings.push_back("property_b: 1/alpha_" + std::to_string(s.k) + " = " +
                                                   format_double(s.inverse_alpha) + " outside [lambda_1, M1]");
                         break;
                       }
                     }
                     report.checks.emplace_back(std::move(o));
                   },
                   [&](const PropertyACheck& c) {
                     if (!normalized) {
                       report.warnings.emplace_back("property_a: lambda_1 != 1, thresholds use unnormalized lambda");
                     }
                     report.checks.emplace_back(
                         PropertyAOutcome{scan_property_a(traj, c.m.value_or(default_window(config, traj)), c.M2, c.l)});
                   },
                   [&](const PropertyGaCheck& c) {
                     report.checks.emplace_back(PropertyGaOutcome{
                         check_property_ga(traj, c.psi.value_or(default_psi(config)),
                                           c.m.value_or(default_window(config, traj)), c.M2, c.l)});
                   },
                   [&](const EnvelopeCheck& c) {
                     EnvelopeOutcome o = run_envelope(c, config, traj);
                     if (o.fallback_reason) {
                       report.warnings.push_back("envelope: refined rate unavailable (" + *o.fallback_reason +
                                                 "), used M1 rate");
                     }
                     if (o.certificate.exact_termination) {
                       report.warnings.emplace_back("envelope: theta = 0, exact termination");
                     }
                     report.checks.emplace_back(std::move(o));
                   },
                   [&](const RateCheck& c) {
                     const std::size_t K = c.K.value_or(traj.steps());
                     RateEstimate r = estimate_rate(traj, c.k0.value_or(default_rate_start(K)), K);
                     report.checks.emplace_back(RateOutcome{r});
                   },
               },
               spec);
  }

  if (traj.steps() > 0) {
    report.rate = default_rate(traj);
    report.rate->theoretical_rate = report.best_theta();
    for (auto& c : report.checks) {
      if (auto* r = std::get_if<RateOutcome>(&c)) r->estimate.theoretical_rate = report.rate->theoretical_rate;
    }
  }
  return report;
}

ordered_json certificate_json(const EnvelopeCertificate& cert) {
  ordered_json j{{"variant", to_string(cert.variant)},
                 {"label", cert.label()},
                 {"theta", number(cert.theta)},
                 {"sigma", numbers(cert.sigma)},
                 {"C", numbers(cert.C)},
                 {"exact_termination", cert.exact_termination}};
  j["audit"] = ordered_json{{"min_slack", number(cert.audit.min_slack)},
                            {"argmin_k", cert.audit.argmin_k},
                            {"argmin_i", cert.audit.argmin_i},
                            {"pass", cert.audit.pass}};
  return j;
}

ordered_json report_json(const RunReport& report) {
  const auto& traj = report.run.trajectory;
  ordered_json j;
  j["name"] = report.name;
  j["problem"] = ordered_json{{"n", traj.problem.dimension()},
                              {"eigenvalues", numbers({traj.problem.eigenvalues().begin(),
                                                       traj.problem.eigenvalues().end()})},
                              {"kappa", number(traj.problem.condition_number())}};
  j["summary"] = ordered_json{{"K", report.K()},
                              {"termination", to_string(report.run.termination)},
                              {"final_g_norm", number(traj.gradients.back().norm())},
                              {"final_fgap", number(traj.fgaps.back())}};
  j["alpha"] = numbers(traj.stepsizes);
  j["references"] = report.run.references;
  ordered_json checks = ordered_json::array();
  for (const auto& c : report.checks) checks.push_back(check_json(c));
  j["checks"] = std::move(checks);
  j["rate"] = report.rate ? rate_json(*report.rate) : ordered_json(nullptr);
  j["warnings"] = report.warnings;
  j["pass"] = report.checks_pass();
  return j;
}

std::string trajectory_csv(const RunReport& report) {
  const auto& traj = report.run.trajectory;
  const std::size_t n = traj.problem.dimension();
  const bool components = n <= 20;
  std::vector<const EnvelopeOutcome*> envelopes;
  for (const auto& c : report.checks) {
    if (const auto* e = std::get_if<EnvelopeOutcome>(&c)) envelopes.push_back(e);
  }

  std::ostringstream out;
  out << "k,alpha,g_norm,fgap";
  if (components) {
    for (std::size_t i = 1; i <= n; ++i) out << ",g_" << i;
  }
  for (std::size_t e = 1; e <= envelopes.size(); ++e) {
    if (components) {
      for (std::size_t i = 1; i <= n; ++i) out << ",env" << e << "_bound_" << i;
    }
    out << ",env" << e << "_fgap_bound";
  }
  out << '\n';

  for (std::size_t k = 0; k < traj.gradients.size(); ++k) {
    const auto& g = traj.gradients[k];
    out << k << ',' << (k < traj.steps() ? format_double(traj.stepsizes[k]) : "") << ','
        << format_double(g.norm()) << ',' << format_double(traj.fgaps[k]);
    if (components) {
      for (double v : g.components) out << ',' << format_double(v);
    }
    for (const auto* e : envelopes) {
      if (components) {
        for (std::size_t i = 0; i < n; ++i) out << ',' << format_double(e->certificate.bound(k, i));
      }
      out << ',' << format_double(e->derived.fgap_bound(k));
    }
    out << '\n';
  }
  return out.str();
}

void write_outputs(const ExperimentConfig& config, const RunReport& report) {
  if (config.csv_path) write_text_file(*config.csv_path, trajectory_csv(report));
  if (config.json_path) write_text_file(*config.json_path, report_json(report).dump(2) + "\n");
}

ExperimentConfig example1_config(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw DomainError("epsilon must be positive");
  SpectralProblem problem({1.0, 8.0, 16.0});
  const double s = std::sqrt(40.0 * epsilon);
  const std::vector<double> x0{std::sqrt(epsilon), s / 8.0, s / 16.0};
  std::vector<double> g0(3);
  for (std::size_t i = 0; i < 3; ++i) g0[i] = problem.eigenvalue(i) * x0[i];

  const PsiSpec psi = PsiSpec::rational({1.0, 2.0}, {0.0, 0.0, 1.0}, true);
  RunOptions options;
  options.max_iter = 8;
  options.startup = StartupPolicy{StartupPolicy::Kind::Sd, 0.0};

  std::vector<CheckSpec> checks;
  checks.emplace_back(PropertyACheck{2, 2.0, {}});
  checks.emplace_back(PropertyBCheck{16.0, 2, psi});
  checks.emplace_back(PropertyGaCheck{psi, 2, 2.0, {}});
  EnvelopeCheck env;
  env.variant = "thm2_retard";
  env.psi = psi;
  env.r = 1;
  checks.emplace_back(env);

  std::ostringstream name;
  name << "example1(eps=" << format_double(epsilon) << ")";
  return ExperimentConfig{name.str(),
                          std::move(problem),
                          std::nullopt,
                          GradientVector{std::move(g0), 0},
                          StepsizeRule::psi_retard(psi, 1),
                          options,
                          std::move(checks),
                          std::nullopt,
                          std::nullopt,
                          {}};
}

RunReport example1_scenario(double epsilon) { return run_experiment(example1_config(epsilon)); }

CompareTable compare_rules(const std::vector<ExperimentConfig>& configs) {
  if (configs.size() < 2) throw ConfigError("compare needs at least two configs");
  for (std::size_t i = 1; i < configs.size(); ++i) {
    if (!(configs[i].problem == configs[0].problem)) {
      throw ConfigError("config " + std::to_string(i) + " (" + configs[i].name + "): problem differs from the first");
    }
    if (configs[i].g0.components != configs[0].g0.components) {
      throw ConfigError("config " + std::to_string(i) + " (" + configs[i].name + "): start differs from the first");
    }
  }
  CompareTable table;
  for (const auto& config : configs) {
    ExperimentConfig c = config;
    const bool has_envelope = std::any_of(c.checks.begin(), c.checks.end(), [](const CheckSpec& s) {
      return std::holds_alternative<EnvelopeCheck>(s);
    });
    if (!has_envelope) c.checks.emplace_back(EnvelopeCheck{});
    const RunReport report = run_experiment(c);
    table.rows.push_back(CompareRow{report.name, report.K(), report.run.termination,
                                    report.rate ? report.rate->empirical_rate : 0.0, report.best_theta()});
  }
  return table;
}

std::string CompareTable::csv() const {
  std::ostringstream out;
  out << "rule,iterations,termination,empirical_rate,theta\n";
  for (const auto& r : rows) {
    out << csv_field(r.name) << ',' << r.iterations << ',' << to_string(r.termination) << ','
        << format_double(r.empirical_rate) << ',' << (r.theta ? format_double(*r.theta) : "") << '\n';
  }
  return out.str();
}

std::string CompareTable::text() const {
  std::vector<std::array<std::string, 5>> cells;
  cells.push_back({"rule", "iterations", "termination", "empirical_rate", "theta"});
  for (const auto& r : rows) {
    std::ostringstream rate;
    rate << std::setprecision(6) << r.empirical_rate;
    std::ostringstream theta;
    if (r.theta) theta << std::setprecision(6) << *r.theta;
    else theta << "-";
    cells.push_back({r.name, std::to_string(r.iterations), to_string(r.termination), rate.str(), theta.str()});
  }
  std::array<std::size_t, 5> width{};
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < 5; ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < 5; ++c) {
      if (c == 0) out << std::left << std::setw(static_cast<int>(width[c])) << row[c];
      else out << "  " << std::right << std::setw(static_cast<int>(width[c])) << row[c];
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace gradlab
