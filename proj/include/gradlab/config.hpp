#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gradlab/dense.hpp"
#include "gradlab/iterate.hpp"
#include "gradlab/psi.hpp"
#include "gradlab/spectral.hpp"
#include "gradlab/stepsize.hpp"
#include "json.hpp"

namespace gradlab {

// Unset optionals are resolved against the rule and problem at run time.

struct PropertyBCheck {
  std::optional<double> M1;          // default lambda_n
  std::optional<std::size_t> m;      // default rule window
  std::optional<PsiSpec> psi;        // default rule's natural weight
};

struct PropertyACheck {
  std::optional<std::size_t> m;
  double M2 = 2.0;
  std::vector<std::size_t> l;
};

struct PropertyGaCheck {
  std::optional<PsiSpec> psi;
  std::optional<std::size_t> m;
  double M2 = 2.0;
  std::vector<std::size_t> l;
};

struct EnvelopeCheck {
  /// thm1, cor1_retard, cor1_multi, thm2_retard, thm2_multi, ga or auto.
  std::string variant = "auto";
  std::optional<PsiSpec> psi;
  std::optional<double> M1;
  std::optional<std::size_t> m;
  std::optional<std::size_t> r;
  std::vector<std::size_t> windows;
  double M2 = 2.0;
};

struct RateCheck {
  std::optional<std::size_t> k0;
  std::optional<std::size_t> K;
};

using CheckSpec = std::variant<PropertyBCheck, PropertyACheck, PropertyGaCheck, EnvelopeCheck, RateCheck>;

/// A fully resolved experiment: the problem is materialized and the start
/// point is already a spectral gradient.
struct ExperimentConfig {
  std::string name;
  SpectralProblem problem;
  std::optional<SpectralDecomposition> decomposition;
  GradientVector g0;
  StepsizeRule rule;
  RunOptions options;
  std::vector<CheckSpec> checks;
  std::optional<std::filesystem::path> csv_path;
  std::optional<std::filesystem::path> json_path;
  std::vector<std::string> warnings;
};

PsiSpec parse_psi(const nlohmann::json& spec, const std::string& field = "psi");

/// Rule grammar: {"kind": ..., parameters}. `problem` resolves
/// {"kind":"const","alpha":"optimal"} to 2/(lambda_1 + lambda_n).
StepsizeRule parse_rule(const nlohmann::json& spec, const SpectralProblem& problem,
                        const std::string& field = "rule");

StartupPolicy parse_startup(const nlohmann::json& spec);

/// Validates and resolves a config document. Relative file paths are taken
/// relative to `base_dir`.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

/// Reads and parses a JSON config file (IoError / ConfigError).
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace gradlab
