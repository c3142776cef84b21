#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gradlab/psi.hpp"
#include "gradlab/spectral.hpp"

namespace gradlab {

/// Relative round-off allowance for envelope audits.
inline constexpr double kAuditTolerance = 1e-10;

enum class EnvelopeVariant { Thm1, Cor1Retard, Cor1Multi, Thm2Retard, Thm2Multi, Ga };

std::string to_string(EnvelopeVariant v);

/// Worst cell of |g_k^(i)| <= C_i theta^k over a trajectory. `min_slack` is
/// relative: (C_i theta^k - |g_k^(i)|) / (C_i theta^k).
struct EnvelopeAudit {
  double min_slack = 0.0;
  std::size_t argmin_k = 0;
  std::size_t argmin_i = 0;
  std::size_t cells = 0;
  bool pass = false;
};

/// Constants of an R-linear envelope |g_k^(i)| <= C_i theta^k.
struct EnvelopeCertificate {
  EnvelopeVariant variant = EnvelopeVariant::Thm1;
  double theta = 0.0;
  std::vector<double> sigma;
  std::vector<double> C;
  /// Window m (range-based and multi-window shapes) or r + 1 (retard shapes).
  std::size_t m = 0;
  /// Retard r for the retard shapes.
  std::size_t retard = 0;
  std::vector<std::size_t> windows;
  double M1 = 0.0;
  double M2 = 1.0;
  /// psi(lambda_i) as supplied; the recursion uses their square roots.
  std::vector<double> psi_values;
  /// theta == 0 and every later gradient vanished.
  bool exact_termination = false;
  EnvelopeAudit audit;

  /// C_i theta^k.
  double bound(std::size_t k, std::size_t i) const;
  std::string label() const;
};

/// Range-based envelope: theta = 1 - lambda_1/M1, sigma_i = max(lambda_i/lambda_1 - 1,
/// 1 - lambda_i/M1), C from the first m gradients.
EnvelopeCertificate envelope_thm1(const GradientTrajectory& traj, const PsiSpec& psi, double M1, std::size_t m);

/// Fixed retard r: leading terms up to g_r and sigma_i^(r+1) in the tail.
EnvelopeCertificate envelope_cor1_retard(const GradientTrajectory& traj, const PsiSpec& psi, double M1,
                                         std::size_t r);

/// Several windows m_1..m_s: the range-based envelope with m = max m_j.
EnvelopeCertificate envelope_cor1_multi(const GradientTrajectory& traj, const PsiSpec& psi, double M1,
                                        const std::vector<std::size_t>& windows);

/// Refined rate 1 - 1/kappa for stepsizes with 1/alpha in [lambda_1, lambda_n];
/// the range is checked against the whole trajectory.
EnvelopeCertificate envelope_thm2_retard(const GradientTrajectory& traj, const PsiSpec& psi, std::size_t r);
EnvelopeCertificate envelope_thm2_multi(const GradientTrajectory& traj, const PsiSpec& psi,
                                        const std::vector<std::size_t>& windows);

/// Property GA envelope: theta = max(1/2, 1 - lambda_1/M1) and M2 inside the
/// tail square root.
EnvelopeCertificate envelope_ga(const GradientTrajectory& traj, const PsiSpec& psi, double M1, double M2,
                                std::size_t m);

EnvelopeAudit audit_envelope(const EnvelopeCertificate& cert, const GradientTrajectory& traj);

/// Iterate-error and objective-gap envelopes implied by a certificate:
/// |e_k^(i)| <= C_i theta^k / lambda_i and f(x_k) - f* <= 1/2 ||Ct||^2 theta^(2k)
/// with Ct_i = C_i / sqrt(lambda_i).
struct DerivedBounds {
  double theta = 0.0;
  std::vector<double> iterate_constants;  // C_i / lambda_i
  std::vector<double> scaled_C;           // C_i / sqrt(lambda_i)
  double scaled_norm_sq = 0.0;            // ||Ct||^2
  bool exact_termination = false;

  double iterate_bound(std::size_t k, std::size_t i) const;
  double fgap_bound(std::size_t k) const;

  EnvelopeAudit iterate_audit;
  EnvelopeAudit fgap_audit;
};

DerivedBounds derived_bounds(const EnvelopeCertificate& cert, const GradientTrajectory& traj);

struct RateEstimate {
  double empirical_rate = 0.0;
  std::size_t k0 = 0;
  std::size_t K = 0;
  std::optional<double> theoretical_rate;
};

/// (||g_K|| / ||g_k0||)^(1/(K - k0)).
RateEstimate estimate_rate(const GradientTrajectory& traj, std::size_t k0, std::size_t K);

/// Default transient cut: k0 = ceil(K / 5).
std::size_t default_rate_start(std::size_t K);

}  // namespace gradlab
