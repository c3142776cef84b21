// gradlab: run stepsize experiments, reproduce the three-dimensional
// counterexample, compare rules and diagonalize dense problems.
//
// Exit codes: 0 ok, 1 config/domain error, 2 a certificate or audit failed,
// 3 I/O error.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "gradlab/dense.hpp"
#include "gradlab/errors.hpp"
#include "gradlab/experiment.hpp"
#include "gradlab/io.hpp"

namespace {

using namespace gradlab;

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kCheckFailure = 2;
constexpr int kIoError = 3;

void print_summary(const RunReport& report) {
  const auto& traj = report.run.trajectory;
  std::cout << report.name << ": K=" << report.K() << " (" << to_string(report.run.termination) << ")"
            << " ||g_K||=" << format_double(traj.gradients.back().norm())
            << " fgap=" << format_double(traj.fgaps.back()) << '\n';
  if (report.rate) std::cout << "  rate " << format_double(report.rate->empirical_rate) << '\n';
  for (const auto& check : report.checks) {
    std::visit(
        [](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, PropertyBOutcome>) {
            std::cout << "  property_b M1=" << format_double(o.certificate.M1) << " m=" << o.certificate.m << ": "
                      << (o.certificate.pass ? "pass" : "FAIL at k=" + std::to_string(*o.certificate.first_failure))
                      << '\n';
          } else if constexpr (std::is_same_v<T, PropertyAOutcome> || std::is_same_v<T, PropertyGaOutcome>) {
            std::cout << (std::is_same_v<T, PropertyAOutcome> ? "  property_a" : "  property_ga")
                      << " m=" << o.scan.m << " M2=" << format_double(o.scan.M2) << ": "
                      << o.scan.witnesses.size() << " witness(es)";
            for (const auto& w : o.scan.witnesses) std::cout << " (k=" << w.k << ",l=" << w.l << ")";
            std::cout << '\n';
          } else if constexpr (std::is_same_v<T, EnvelopeOutcome>) {
            std::cout << "  envelope " << o.certificate.label() << " theta=" << format_double(o.certificate.theta)
                      << " min_slack=" << format_double(o.certificate.audit.min_slack) << ": "
                      << (o.pass() ? "pass" : "FAIL") << '\n';
          } else {
            std::cout << "  rate k0=" << o.estimate.k0 << " K=" << o.estimate.K << ": "
                      << format_double(o.estimate.empirical_rate) << '\n';
          }
        },
        check);
  }
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
}

int finish(const RunReport& report) {
  print_summary(report);
  return report.checks_pass() ? kOk : kCheckFailure;
}

int cmd_run(const std::string& path) {
  const ExperimentConfig config = load_config(path);
  const RunReport report = run_experiment(config);
  write_outputs(config, report);
  return finish(report);
}

int cmd_example1(double epsilon, const std::string& csv, const std::string& json) {
  ExperimentConfig config = example1_config(epsilon);
  if (!csv.empty()) config.csv_path = csv;
  if (!json.empty()) config.json_path = json;
  const RunReport report = run_experiment(config);
  write_outputs(config, report);
  const auto& alpha = report.run.trajectory.stepsizes;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    std::printf("k=%zu  alpha=%.6f  1/alpha=%.6f\n", k, alpha[k], 1.0 / alpha[k]);
  }
  return finish(report);
}

int cmd_compare(const std::vector<std::string>& paths, const std::string& csv) {
  std::vector<ExperimentConfig> configs;
  for (const auto& p : paths) configs.push_back(load_config(p));
  const CompareTable table = compare_rules(configs);
  if (!csv.empty()) write_text_file(csv, table.csv());
  std::cout << table.text();
  return kOk;
}

int cmd_spectralize(const std::string& path) {
  const DenseProblem dense = read_matrix_file(path);
  const SpectralDecomposition d = spectralize(dense);
  const std::size_t n = d.problem().dimension();
  const auto rebuilt = d.reconstruct();
  double err = 0.0;
  for (std::size_t i = 0; i < rebuilt.size(); ++i) err = std::max(err, std::abs(rebuilt[i] - dense.matrix[i]));

  nlohmann::ordered_json out;
  std::vector<double> eig(d.problem().eigenvalues().begin(), d.problem().eigenvalues().end());
  out["n"] = n;
  out["eigenvalues"] = eig;
  out["condition_number"] = d.problem().condition_number();
  std::vector<std::vector<double>> rows(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) rows[i][j] = d.basis()[i * n + j];
  }
  out["basis"] = rows;
  out["reconstruction_max_abs_error"] = err;
  out["duplicates"] = d.problem().has_duplicates();
  std::cout << out.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral stepsize experiments on strictly convex quadratics"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run one experiment config");
  run->add_option("config", config_path, "Experiment JSON")->required();

  double epsilon = 1.0;
  std::string ex_csv, ex_json;
  auto* ex = app.add_subcommand("example1", "Reproduce the three-dimensional counterexample");
  ex->add_option("--epsilon", epsilon, "Scale of x0")->check(CLI::PositiveNumber);
  ex->add_option("--csv", ex_csv, "Trajectory CSV output");
  ex->add_option("--json", ex_json, "JSON report output");

  std::vector<std::string> compare_paths;
  std::string compare_csv;
  auto* cmp = app.add_subcommand("compare", "Compare rules on a shared problem");
  cmp->add_option("configs", compare_paths, "Experiment JSON files")->required();
  cmp->add_option("--csv", compare_csv, "Summary CSV output");

  std::string matrix_path;
  auto* spec = app.add_subcommand("spectralize", "Diagonalize a dense SPD matrix");
  spec->add_option("matrix", matrix_path, "Matrix file: n, then n*n entries")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(config_path);
    if (*ex) return cmd_example1(epsilon, ex_csv, ex_json);
    if (*cmp) return cmd_compare(compare_paths, compare_csv);
    if (*spec) return cmd_spectralize(matrix_path);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}
