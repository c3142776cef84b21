#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gradlab/psi.hpp"
#include "gradlab/spectral.hpp"

namespace gradlab {

/// Relative slack applied to every inequality checked against a trajectory.
inline constexpr double kInequalitySlack = 1e-12;

// ---------------------------------------------------------------------------
// Property B: lambda_1 <= 1/alpha_k <= M1, and for some v(k) in the window
// {k, ..., max(k-m+1, 0)}
//     alpha_k <= g_v' psi(A) g_v / g_v' A psi(A) g_v.
// ---------------------------------------------------------------------------

struct PropertyBStep {
  std::size_t k = 0;
  double inverse_alpha = 0.0;
  /// lambda_1 <= 1/alpha_k <= M1.
  bool pass_range = false;
  /// Index satisfying the weighted bound, when one exists.
  std::optional<std::size_t> witness;
  /// alpha_k * (g_v'A psi g_v / g_v' psi g_v) at the witness, or the smallest
  /// value over the window when no witness exists. <= 1 means satisfied.
  double quotient = 0.0;

  bool pass() const noexcept { return pass_range && witness.has_value(); }
};

struct PropertyBCertificate {
  double M1 = 0.0;
  std::size_t m = 0;
  PsiSpec psi;
  std::vector<PropertyBStep> steps;
  bool pass = false;
  std::optional<std::size_t> first_failure;
  /// lambda_1 == 1, the normalization assumed by Property A.
  bool lambda1_normalized = false;
};

/// Checks both conditions at every step. `references` (optional, one per
/// step) are tried first; otherwise the window is searched from k downward
/// and the nearest satisfying index is recorded.
PropertyBCertificate certify_property_b(const GradientTrajectory& traj, std::span<const std::size_t> references,
                                        const PsiSpec& psi, double M1, std::size_t m,
                                        double slack = kInequalitySlack);

// ---------------------------------------------------------------------------
// Property A / GA falsification.
//
// For a step k and leading block l, with weights w_i (1 for Property A,
// psi(lambda_i) for GA) and G(k,l) = sum_{i<=l} w_i (g_k^(i))^2, the
// condition reads: if G(k-j,l) <= eps and w_{l+1} (g_{k-j}^(l+1))^2 >= M2 eps
// over the window, then 1/alpha_k >= 2/3 lambda_{l+1}. A witness is a cell
// where the antecedent holds and the conclusion fails.
// ---------------------------------------------------------------------------

struct PropertyWitness {
  std::size_t k = 0;
  /// Size of the leading block; the dominant component is the (l+1)-th.
  std::size_t l = 0;
  /// max over the window of G(k-j, l) (or, when that is zero, the largest
  /// eps the antecedent admits).
  double epsilon = 0.0;
  double M2 = 0.0;
  /// Largest M2 for which this cell stays a witness.
  double M2_sup = 0.0;
  std::size_t m = 0;
  double inverse_alpha = 0.0;
  /// 2/3 lambda_{l+1}.
  double threshold = 0.0;

  friend bool operator==(const PropertyWitness&, const PropertyWitness&) = default;
};

struct PropertyScan {
  std::size_t m = 0;
  double M2 = 0.0;
  /// Identity for Property A.
  PsiSpec psi;
  std::vector<PropertyWitness> witnesses;
  bool lambda1_normalized = false;

  bool falsified() const noexcept { return !witnesses.empty(); }
};

/// Every Property A witness over all (k, l). `l_values` restricts the leading
/// block sizes (each in [1, n-1]); empty means all.
PropertyScan scan_property_a(const GradientTrajectory& traj, std::size_t m, double M2,
                             std::span<const std::size_t> l_values = {});

/// First Property A witness in (k, l) order, if any.
std::optional<PropertyWitness> falsify_property_a(const GradientTrajectory& traj, std::size_t m, double M2,
                                                  std::span<const std::size_t> l_values = {});

/// Property GA scan with G(k,l) weighted by psi.
PropertyScan check_property_ga(const GradientTrajectory& traj, const PsiSpec& psi, std::size_t m, double M2,
                               std::span<const std::size_t> l_values = {});

/// Recomputes a witness from the raw definition with extended precision.
bool validate_witness(const GradientTrajectory& traj, std::span<const double> weights, const PropertyWitness& w);

}  // namespace gradlab
