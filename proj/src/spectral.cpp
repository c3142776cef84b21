#include "gradlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gradlab/errors.hpp"

namespace gradlab {

SpectralProblem::SpectralProblem(std::vector<double> eigenvalues)
    : eigenvalues_(std::move(eigenvalues)) {
  if (eigenvalues_.empty()) {
    throw StructuralError("spectral problem needs at least one eigenvalue");
  }
  for (std::size_t i = 0; i < eigenvalues_.size(); ++i) {
    const double lambda = eigenvalues_[i];
    if (!std::isfinite(lambda) || lambda <= 0.0) {
      throw DomainError("eigenvalue " + std::to_string(i) + " is not a finite positive number: " +
                        std::to_string(lambda));
    }
    if (i > 0) {
      if (lambda < eigenvalues_[i - 1]) {
        throw DomainError("eigenvalues must be sorted ascending (index " + std::to_string(i) + ")");
      }
      if (lambda == eigenvalues_[i - 1]) has_duplicates_ = true;
    }
  }
  if (!std::isfinite(condition_number())) {
    throw DomainError("condition number is not finite");
  }
}

double GradientVector::norm() const {
  double sum = 0.0;
  for (double c : components) sum += c * c;
  return std::sqrt(sum);
}

bool GradientVector::is_zero() const {
  return std::all_of(components.begin(), components.end(), [](double c) { return c == 0.0; });
}

void require_dimension(const GradientVector& g, const SpectralProblem& problem) {
  if (g.dimension() != problem.dimension()) {
    throw StructuralError("gradient has dimension " + std::to_string(g.dimension()) +
                          ", problem has dimension " + std::to_string(problem.dimension()));
  }
}

GradientVector gradient_step(const GradientVector& g, double alpha, const SpectralProblem& problem) {
  require_dimension(g, problem);
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError("stepsize must be finite and positive, got " + std::to_string(alpha));
  }
  GradientVector next{std::vector<double>(g.dimension()), g.k + 1};
  const auto lambda = problem.eigenvalues();
  for (std::size_t i = 0; i < g.dimension(); ++i) {
    next.components[i] = (1.0 - alpha * lambda[i]) * g.components[i];
  }
  return next;
}

double fgap(const GradientVector& g, const SpectralProblem& problem) {
  require_dimension(g, problem);
  const auto lambda = problem.eigenvalues();
  double sum = 0.0;
  for (std::size_t i = 0; i < g.dimension(); ++i) {
    sum += g.components[i] * g.components[i] / lambda[i];
  }
  return 0.5 * sum;
}

std::vector<double> error_vector(const GradientVector& g, const SpectralProblem& problem) {
  require_dimension(g, problem);
  const auto lambda = problem.eigenvalues();
  std::vector<double> e(g.dimension());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = g.components[i] / lambda[i];
  return e;
}

double recurrence_residual_ulps(const GradientTrajectory& traj) {
  const auto lambda = traj.problem.eigenvalues();
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.steps(); ++k) {
    const auto& cur = traj.gradients.at(k).components;
    const auto& next = traj.gradients.at(k + 1).components;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const double expected = (1.0 - traj.stepsizes[k] * lambda[i]) * cur[i];
      const double scale = std::max(std::abs(expected), std::abs(next[i]));
      if (scale == 0.0) continue;
      const double ulp = std::nextafter(scale, std::numeric_limits<double>::infinity()) - scale;
      worst = std::max(worst, std::abs(next[i] - expected) / ulp);
    }
  }
  return worst;
}

}  // namespace gradlab
