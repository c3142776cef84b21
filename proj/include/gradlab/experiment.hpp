#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gradlab/config.hpp"
#include "gradlab/envelope.hpp"
#include "gradlab/iterate.hpp"
#include "gradlab/property.hpp"
#include "json.hpp"

namespace gradlab {

struct PropertyBOutcome {
  PropertyBCertificate certificate;
};

struct PropertyAOutcome {
  PropertyScan scan;
};

struct PropertyGaOutcome {
  PropertyScan scan;
};

struct EnvelopeOutcome {
  /// Variant as written in the config ("auto" included).
  std::string requested;
  EnvelopeCertificate certificate;
  DerivedBounds derived;
  /// Set when "auto" fell back from the refined rate to the M1 rate.
  std::optional<std::string> fallback_reason;
  bool pass() const noexcept { return certificate.audit.pass && derived.iterate_audit.pass && derived.fgap_audit.pass; }
};

struct RateOutcome {
  RateEstimate estimate;
};

using CheckOutcome = std::variant<PropertyBOutcome, PropertyAOutcome, PropertyGaOutcome, EnvelopeOutcome, RateOutcome>;

struct RunReport {
  std::string name;
  RunResult run;
  /// One entry per configured check, in config order.
  std::vector<CheckOutcome> checks;
  /// Always present once at least one step was taken.
  std::optional<RateEstimate> rate;
  std::vector<std::string> warnings;

  std::size_t K() const noexcept { return run.trajectory.steps(); }
  /// Property B certificates and envelope audits all pass.
  bool checks_pass() const;
  /// Tightest rate among passing envelopes.
  std::optional<double> best_theta() const;
};

RunReport run_experiment(const ExperimentConfig& config);

nlohmann::ordered_json report_json(const RunReport& report);
nlohmann::ordered_json certificate_json(const EnvelopeCertificate& cert);

/// k, alpha, g_norm, fgap, g_1..g_n (n <= 20), then bound columns for every
/// envelope check. The final row has an empty alpha.
std::string trajectory_csv(const RunReport& report);

/// Writes whichever outputs the config names.
void write_outputs(const ExperimentConfig& config, const RunReport& report);

/// The three-dimensional counterexample: A = diag(1, 8, 16), b = 0,
/// x0 = (sqrt(eps), sqrt(40 eps)/8, sqrt(40 eps)/16) and the retarded rule
/// with psi(z) = ((1+2z)/z^2)^2.
ExperimentConfig example1_config(double epsilon = 1.0);
RunReport example1_scenario(double epsilon = 1.0);

struct CompareRow {
  std::string name;
  std::size_t iterations = 0;
  Termination termination = Termination::MaxIterations;
  double empirical_rate = 0.0;
  std::optional<double> theta;
};

struct CompareTable {
  std::vector<CompareRow> rows;
  std::string csv() const;
  std::string text() const;
};

/// Runs every config (same problem and start required) and tabulates them in
/// input order.
CompareTable compare_rules(const std::vector<ExperimentConfig>& configs);

}  // namespace gradlab
