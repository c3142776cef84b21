#include "gradlab/property.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gradlab/errors.hpp"

namespace gradlab {

namespace {

void require_steps(const GradientTrajectory& traj) {
  if (traj.steps() == 0) throw StructuralError("trajectory has no steps");
  if (traj.gradients.size() != traj.steps() + 1) {
    throw StructuralError("trajectory must hold one more gradient than stepsizes");
  }
}

// Oldest index of the window ending at k.
std::size_t window_start(std::size_t k, std::size_t m) { return k + 1 >= m ? k + 1 - m : 0; }

// Weighted Rayleigh quotient sum lambda w g^2 / sum w g^2, or nullopt for g = 0.
std::optional<double> weighted_rayleigh(const GradientVector& g, std::span<const double> lambda,
                                        const std::vector<double>& w) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double wg2 = w[i] * g.components[i] * g.components[i];
    num += lambda[i] * wg2;
    den += wg2;
  }
  if (den == 0.0) return std::nullopt;
  return num / den;
}

std::vector<std::size_t> resolve_l_values(std::span<const std::size_t> l_values, std::size_t n) {
  std::vector<std::size_t> out;
  if (l_values.empty()) {
    for (std::size_t l = 1; l < n; ++l) out.push_back(l);
    return out;
  }
  for (std::size_t l : l_values) {
    if (l < 1 || l >= n) {
      throw StructuralError("leading block size l = " + std::to_string(l) + " is outside [1, n-1]");
    }
    out.push_back(l);
  }
  return out;
}

PropertyScan scan(const GradientTrajectory& traj, const PsiSpec& psi, std::size_t m, double M2,
                  std::span<const std::size_t> l_values) {
  require_steps(traj);
  if (m == 0) throw StructuralError("window m must be >= 1");
  if (m > traj.steps()) {
    throw StructuralError("window m = " + std::to_string(m) + " is longer than the trajectory (" +
                          std::to_string(traj.steps()) + " steps)");
  }
  if (!(M2 > 0.0)) throw DomainError("M2 must be positive");

  const auto& problem = traj.problem;
  const auto lambda = problem.eigenvalues();
  const std::size_t n = problem.dimension();
  const std::vector<double> w = psi.evaluate(problem);
  const auto ls = resolve_l_values(l_values, n);

  PropertyScan result;
  result.m = m;
  result.M2 = M2;
  result.psi = psi;
  result.lambda1_normalized = problem.smallest() == 1.0;

  // prefix[k][l] = G(k, l).
  std::vector<std::vector<double>> prefix(traj.gradients.size(), std::vector<double>(n + 1, 0.0));
  for (std::size_t k = 0; k < traj.gradients.size(); ++k) {
    const auto& g = traj.gradients[k].components;
    for (std::size_t i = 0; i < n; ++i) prefix[k][i + 1] = prefix[k][i] + w[i] * g[i] * g[i];
  }

  for (std::size_t k = 0; k < traj.steps(); ++k) {
    const double inverse_alpha = 1.0 / traj.stepsizes[k];
    const std::size_t first = window_start(k, m);
    for (std::size_t l : ls) {
      const double threshold = 2.0 / 3.0 * lambda[l];
      if (!(inverse_alpha < threshold * (1.0 - kInequalitySlack))) continue;

      double eps = 0.0;
      double dominant = std::numeric_limits<double>::infinity();
      for (std::size_t v = first; v <= k; ++v) {
        eps = std::max(eps, prefix[v][l]);
        const double g = traj.gradients[v].components[l];
        dominant = std::min(dominant, w[l] * g * g);
      }
      if (!(dominant > 0.0)) continue;

      double m2_sup;
      if (eps > 0.0) {
        m2_sup = dominant / eps;
        if (!(dominant >= M2 * eps)) continue;
      } else {
        // Any eps in (0, dominant / M2] satisfies the antecedent.
        eps = dominant / M2;
        m2_sup = std::numeric_limits<double>::infinity();
      }

      PropertyWitness witness{k, l, eps, M2, m2_sup, m, inverse_alpha, threshold};
      if (!validate_witness(traj, w, witness)) {
        throw std::logic_error("property scan produced a witness that fails re-validation at k = " +
                               std::to_string(k));
      }
      result.witnesses.push_back(witness);
    }
  }
  return result;
}

}  // namespace

PropertyBCertificate certify_property_b(const GradientTrajectory& traj, std::span<const std::size_t> references,
                                        const PsiSpec& psi, double M1, std::size_t m, double slack) {
  require_steps(traj);
  if (m == 0) throw StructuralError("window m must be >= 1");
  if (!references.empty() && references.size() != traj.steps()) {
    throw StructuralError("reference records must cover every step");
  }
  const auto& problem = traj.problem;
  if (!(M1 >= problem.smallest())) throw DomainError("M1 must be >= lambda_1");
  const auto lambda = problem.eigenvalues();
  const std::vector<double> w = psi.evaluate(problem);

  PropertyBCertificate cert;
  cert.M1 = M1;
  cert.m = m;
  cert.psi = psi;
  cert.lambda1_normalized = problem.smallest() == 1.0;
  cert.pass = true;

  for (std::size_t k = 0; k < traj.steps(); ++k) {
    const double alpha = traj.stepsizes[k];
    PropertyBStep step;
    step.k = k;
    step.inverse_alpha = 1.0 / alpha;
    step.pass_range =
        step.inverse_alpha >= problem.smallest() * (1.0 - slack) && step.inverse_alpha <= M1 * (1.0 + slack);

    const std::size_t first = window_start(k, m);
    std::vector<std::size_t> candidates;
    if (!references.empty() && references[k] >= first && references[k] <= k) {
      candidates.push_back(references[k]);
    }
    for (std::size_t v = k + 1; v-- > first;) candidates.push_back(v);

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t v : candidates) {
      const auto rq = weighted_rayleigh(traj.gradients[v], lambda, w);
      if (!rq) continue;
      const double q = alpha * *rq;
      if (q <= 1.0 + slack) {
        step.witness = v;
        step.quotient = q;
        break;
      }
      best = std::min(best, q);
    }
    if (!step.witness) step.quotient = best;

    if (!step.pass() && cert.pass) {
      cert.pass = false;
      cert.first_failure = k;
    }
    cert.steps.push_back(step);
  }
  return cert;
}

PropertyScan scan_property_a(const GradientTrajectory& traj, std::size_t m, double M2,
                             std::span<const std::size_t> l_values) {
  return scan(traj, PsiSpec::identity(), m, M2, l_values);
}

std::optional<PropertyWitness> falsify_property_a(const GradientTrajectory& traj, std::size_t m, double M2,
                                                  std::span<const std::size_t> l_values) {
  auto result = scan_property_a(traj, m, M2, l_values);
  if (result.witnesses.empty()) return std::nullopt;
  return result.witnesses.front();
}

PropertyScan check_property_ga(const GradientTrajectory& traj, const PsiSpec& psi, std::size_t m, double M2,
                               std::span<const std::size_t> l_values) {
  return scan(traj, psi, m, M2, l_values);
}

bool validate_witness(const GradientTrajectory& traj, std::span<const double> weights, const PropertyWitness& w) {
  const auto lambda = traj.problem.eigenvalues();
  if (w.l < 1 || w.l >= lambda.size() || w.k >= traj.steps() || !(w.epsilon > 0.0)) return false;
  const long double eps = w.epsilon;
  const long double tol = kInequalitySlack;
  const std::size_t first = window_start(w.k, w.m);
  for (std::size_t v = first; v <= w.k; ++v) {
    const auto& g = traj.gradients[v].components;
    long double lead = 0.0L;
    for (std::size_t i = 0; i < w.l; ++i) {
      lead += static_cast<long double>(weights[i]) * g[i] * g[i];
    }
    if (lead > eps * (1.0L + tol)) return false;
    const long double dominant = static_cast<long double>(weights[w.l]) * g[w.l] * g[w.l];
    if (dominant < static_cast<long double>(w.M2) * eps * (1.0L - tol)) return false;
  }
  const long double inverse_alpha = 1.0L / static_cast<long double>(traj.stepsizes[w.k]);
  return inverse_alpha < 2.0L / 3.0L * static_cast<long double>(lambda[w.l]);
}

}  // namespace gradlab
