#include "gradlab/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "gradlab/errors.hpp"
#include "gradlab/property.hpp"

namespace gradlab {

namespace {

struct Shape {
  EnvelopeVariant variant;
  double theta;
  std::vector<double> sigma;
  // Number of leading |g_j|/theta^j terms.
  std::size_t lead;
  // sigma -> max(sigma, sigma^m) or sigma^(r+1).
  std::function<double(double)> tail_factor;
  double M2 = 1.0;
};

std::vector<double> sigmas(const SpectralProblem& problem, double upper) {
  const auto lambda = problem.eigenvalues();
  std::vector<double> s(lambda.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = std::max(lambda[i] / problem.smallest() - 1.0, 1.0 - lambda[i] / upper);
  }
  return s;
}

double infinity_norm(const std::vector<double>& v) {
  double out = 0.0;
  for (double x : v) out = std::max(out, std::abs(x));
  return out;
}

EnvelopeCertificate build(const GradientTrajectory& traj, const PsiSpec& psi, Shape shape) {
  const auto& problem = traj.problem;
  const std::size_t n = problem.dimension();
  if (shape.lead == 0) throw StructuralError("envelope window must be >= 1");
  if (traj.gradients.size() < shape.lead) {
    throw StructuralError("envelope needs " + std::to_string(shape.lead) + " leading gradients, trajectory has " +
                          std::to_string(traj.gradients.size()));
  }
  for (const auto& g : traj.gradients) require_dimension(g, problem);

  EnvelopeCertificate cert;
  cert.variant = shape.variant;
  cert.theta = shape.theta;
  cert.sigma = shape.sigma;
  cert.m = shape.lead;
  cert.M2 = shape.M2;
  cert.psi_values = psi.evaluate(problem);
  const std::vector<double> roots = envelope_weights(cert.psi_values);
  const auto& g0 = traj.gradients.front().components;
  cert.C.assign(n, 0.0);

  if (shape.theta == 0.0) {
    // Degenerate rate: the bound is C_i at k = 0 and zero afterwards.
    const double scale = kAuditTolerance * infinity_norm(g0);
    for (std::size_t j = 1; j < shape.lead; ++j) {
      for (double c : traj.gradients[j].components) {
        if (std::abs(c) > scale) {
          throw DomainError("theta = 0 but gradient g_" + std::to_string(j) +
                            " is nonzero; no finite envelope exists");
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) cert.C[i] = std::abs(g0[i]);
    cert.exact_termination = true;
    cert.audit = audit_envelope(cert, traj);
    return cert;
  }

  const double theta_lead = std::pow(shape.theta, static_cast<double>(shape.lead));
  cert.C[0] = std::abs(g0[0]);
  double tail_sum = cert.psi_values[0] * cert.C[0] * cert.C[0];
  for (std::size_t i = 1; i < n; ++i) {
    double c = 0.0;
    for (std::size_t j = 0; j < shape.lead; ++j) {
      c = std::max(c, std::abs(traj.gradients[j].components[i]) / std::pow(shape.theta, static_cast<double>(j)));
    }
    const double factor = shape.tail_factor(cert.sigma[i]);
    if (factor > 0.0 && tail_sum > 0.0) {
      c = std::max(c, factor / (theta_lead * roots[i]) * std::sqrt(shape.M2 * tail_sum));
    }
    cert.C[i] = c;
    tail_sum += cert.psi_values[i] * c * c;
  }
  cert.audit = audit_envelope(cert, traj);
  return cert;
}

void require_upper(const SpectralProblem& problem, double M1) {
  if (!(M1 >= problem.smallest()) || !std::isfinite(M1)) {
    throw DomainError("M1 must be finite and >= lambda_1");
  }
}

void require_inverse_range(const GradientTrajectory& traj) {
  const auto& problem = traj.problem;
  for (std::size_t k = 0; k < traj.steps(); ++k) {
    const double inverse = 1.0 / traj.stepsizes[k];
    if (inverse < problem.smallest() * (1.0 - kInequalitySlack) ||
        inverse > problem.largest() * (1.0 + kInequalitySlack)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "step " << k << ": 1/alpha = " << inverse << " lies outside [lambda_1, lambda_n] = ["
          << problem.smallest() << ", " << problem.largest() << "]";
      throw DomainError(msg.str());
    }
  }
}

std::size_t max_window(const std::vector<std::size_t>& windows) {
  if (windows.empty()) throw StructuralError("multi-window envelope needs at least one window");
  const std::size_t m = *std::max_element(windows.begin(), windows.end());
  if (*std::min_element(windows.begin(), windows.end()) == 0) throw StructuralError("windows must be >= 1");
  return m;
}

std::function<double(double)> window_factor(std::size_t m) {
  return [m](double s) { return std::max(s, std::pow(s, static_cast<double>(m))); };
}

std::function<double(double)> retard_factor(std::size_t r) {
  return [r](double s) { return std::pow(s, static_cast<double>(r + 1)); };
}

double theta_general(const SpectralProblem& problem, double M1) { return 1.0 - problem.smallest() / M1; }

double theta_refined(const SpectralProblem& problem) { return 1.0 - 1.0 / problem.condition_number(); }

}  // namespace

std::string to_string(EnvelopeVariant v) {
  switch (v) {
    case EnvelopeVariant::Thm1:
      return "THM1";
    case EnvelopeVariant::Cor1Retard:
      return "COR1_RETARD";
    case EnvelopeVariant::Cor1Multi:
      return "COR1_MULTI";
    case EnvelopeVariant::Thm2Retard:
      return "THM2_RETARD";
    case EnvelopeVariant::Thm2Multi:
      return "THM2_MULTI";
    case EnvelopeVariant::Ga:
      return "GA";
  }
  return "UNKNOWN";
}

double EnvelopeCertificate::bound(std::size_t k, std::size_t i) const {
  if (k == 0) return C.at(i);
  return C.at(i) * std::pow(theta, static_cast<double>(k));
}

std::string EnvelopeCertificate::label() const {
  std::ostringstream out;
  out << to_string(variant);
  switch (variant) {
    case EnvelopeVariant::Cor1Retard:
    case EnvelopeVariant::Thm2Retard:
      out << "(r=" << retard << ")";
      break;
    case EnvelopeVariant::Ga:
      out << "(M2=" << M2 << ")";
      break;
    default:
      out << "(m=" << m << ")";
  }
  return out.str();
}

EnvelopeCertificate envelope_thm1(const GradientTrajectory& traj, const PsiSpec& psi, double M1, std::size_t m) {
  require_upper(traj.problem, M1);
  auto cert = build(traj, psi,
                    Shape{EnvelopeVariant::Thm1, theta_general(traj.problem, M1), sigmas(traj.problem, M1), m,
                          window_factor(m)});
  cert.M1 = M1;
  return cert;
}

EnvelopeCertificate envelope_cor1_retard(const GradientTrajectory& traj, const PsiSpec& psi, double M1,
                                         std::size_t r) {
  require_upper(traj.problem, M1);
  auto cert = build(traj, psi,
                    Shape{EnvelopeVariant::Cor1Retard, theta_general(traj.problem, M1), sigmas(traj.problem, M1),
                          r + 1, retard_factor(r)});
  cert.M1 = M1;
  cert.retard = r;
  return cert;
}

EnvelopeCertificate envelope_cor1_multi(const GradientTrajectory& traj, const PsiSpec& psi, double M1,
                                        const std::vector<std::size_t>& windows) {
  require_upper(traj.problem, M1);
  const std::size_t m = max_window(windows);
  auto cert = build(traj, psi,
                    Shape{EnvelopeVariant::Cor1Multi, theta_general(traj.problem, M1), sigmas(traj.problem, M1), m,
                          window_factor(m)});
  cert.M1 = M1;
  cert.windows = windows;
  return cert;
}

EnvelopeCertificate envelope_thm2_retard(const GradientTrajectory& traj, const PsiSpec& psi, std::size_t r) {
  require_inverse_range(traj);
  const auto& problem = traj.problem;
  auto cert = build(traj, psi,
                    Shape{EnvelopeVariant::Thm2Retard, theta_refined(problem), sigmas(problem, problem.largest()),
                          r + 1, retard_factor(r)});
  cert.M1 = problem.largest();
  cert.retard = r;
  return cert;
}

EnvelopeCertificate envelope_thm2_multi(const GradientTrajectory& traj, const PsiSpec& psi,
                                        const std::vector<std::size_t>& windows) {
  require_inverse_range(traj);
  const auto& problem = traj.problem;
  const std::size_t m = max_window(windows);
  auto cert = build(traj, psi,
                    Shape{EnvelopeVariant::Thm2Multi, theta_refined(problem), sigmas(problem, problem.largest()), m,
                          window_factor(m)});
  cert.M1 = problem.largest();
  cert.windows = windows;
  return cert;
}

EnvelopeCertificate envelope_ga(const GradientTrajectory& traj, const PsiSpec& psi, double M1, double M2,
                                std::size_t m) {
  require_upper(traj.problem, M1);
  if (!(M2 > 0.0) || !std::isfinite(M2)) throw DomainError("M2 must be finite and positive");
  const double theta = std::max(0.5, theta_general(traj.problem, M1));
  auto cert = build(traj, psi,
                    Shape{EnvelopeVariant::Ga, theta, sigmas(traj.problem, M1), m, window_factor(m), M2});
  cert.M1 = M1;
  return cert;
}

namespace {

// Tracks the worst relative slack of value <= bound over a grid of cells.
struct SlackTracker {
  EnvelopeAudit audit{std::numeric_limits<double>::infinity(), 0, 0, 0, true};

  void observe(std::size_t k, std::size_t i, double bound, double value, double scale) {
    ++audit.cells;
    double relative;
    if (std::isinf(bound)) {
      relative = 1.0;
    } else if (scale > 0.0) {
      relative = (bound - value) / scale;
    } else {
      relative = value == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    }
    if (relative < audit.min_slack) {
      audit.min_slack = relative;
      audit.argmin_k = k;
      audit.argmin_i = i;
    }
    if (relative < -kAuditTolerance) audit.pass = false;
  }
};

}  // namespace

EnvelopeAudit audit_envelope(const EnvelopeCertificate& cert, const GradientTrajectory& traj) {
  SlackTracker tracker;
  const double exact_scale = infinity_norm(cert.C);
  for (std::size_t k = 0; k < traj.gradients.size(); ++k) {
    const auto& g = traj.gradients[k].components;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double bound = cert.bound(k, i);
      const double scale = cert.exact_termination && k > 0 ? exact_scale : bound;
      tracker.observe(k, i, bound, std::abs(g[i]), scale);
    }
  }
  return tracker.audit;
}

double DerivedBounds::iterate_bound(std::size_t k, std::size_t i) const {
  if (k == 0) return iterate_constants.at(i);
  return iterate_constants.at(i) * std::pow(theta, static_cast<double>(k));
}

double DerivedBounds::fgap_bound(std::size_t k) const {
  if (k == 0) return 0.5 * scaled_norm_sq;
  return 0.5 * scaled_norm_sq * std::pow(theta, 2.0 * static_cast<double>(k));
}

DerivedBounds derived_bounds(const EnvelopeCertificate& cert, const GradientTrajectory& traj) {
  const auto lambda = traj.problem.eigenvalues();
  if (cert.C.size() != lambda.size()) throw StructuralError("certificate does not match the problem dimension");

  DerivedBounds out;
  out.theta = cert.theta;
  out.exact_termination = cert.exact_termination;
  out.iterate_constants.resize(lambda.size());
  out.scaled_C.resize(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    out.iterate_constants[i] = cert.C[i] / lambda[i];
    out.scaled_C[i] = cert.C[i] / std::sqrt(lambda[i]);
    out.scaled_norm_sq += cert.C[i] * cert.C[i] / lambda[i];
  }

  SlackTracker iterates;
  SlackTracker gaps;
  const double iterate_scale = infinity_norm(out.iterate_constants);
  for (std::size_t k = 0; k < traj.gradients.size(); ++k) {
    const auto e = error_vector(traj.gradients[k], traj.problem);
    for (std::size_t i = 0; i < e.size(); ++i) {
      const double bound = out.iterate_bound(k, i);
      iterates.observe(k, i, bound, std::abs(e[i]), cert.exact_termination && k > 0 ? iterate_scale : bound);
    }
    const double bound = out.fgap_bound(k);
    const double gap = k < traj.fgaps.size() ? traj.fgaps[k] : fgap(traj.gradients[k], traj.problem);
    gaps.observe(k, 0, bound, gap, cert.exact_termination && k > 0 ? 0.5 * out.scaled_norm_sq : bound);
  }
  out.iterate_audit = iterates.audit;
  out.fgap_audit = gaps.audit;
  return out;
}

std::size_t default_rate_start(std::size_t K) { return (K + 4) / 5; }

RateEstimate estimate_rate(const GradientTrajectory& traj, std::size_t k0, std::size_t K) {
  if (!(K > k0)) throw StructuralError("rate window needs K > k0");
  if (K >= traj.gradients.size()) {
    throw StructuralError("rate window end K = " + std::to_string(K) + " is beyond the trajectory");
  }
  const double base = traj.gradients[k0].norm();
  if (base == 0.0) throw ConvergenceSignal("gradient g_" + std::to_string(k0) + " is zero");
  const double ratio = traj.gradients[K].norm() / base;
  return RateEstimate{std::pow(ratio, 1.0 / static_cast<double>(K - k0)), k0, K, std::nullopt};
}

}  // namespace gradlab
