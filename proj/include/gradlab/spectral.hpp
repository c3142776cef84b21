#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gradlab {

/// A strictly convex quadratic f(x) = 1/2 x'Ax - b'x expressed in the
/// eigenbasis of A. Only the spectrum is needed: in these coordinates the
/// gradient recursion decouples componentwise.
class SpectralProblem {
 public:
  /// Eigenvalues must be positive, finite and sorted ascending. Repeated
  /// values are accepted and flagged through has_duplicates().
  explicit SpectralProblem(std::vector<double> eigenvalues);

  std::size_t dimension() const noexcept { return eigenvalues_.size(); }
  std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }
  double eigenvalue(std::size_t i) const { return eigenvalues_.at(i); }
  double smallest() const noexcept { return eigenvalues_.front(); }
  double largest() const noexcept { return eigenvalues_.back(); }
  double condition_number() const noexcept { return largest() / smallest(); }
  bool has_duplicates() const noexcept { return has_duplicates_; }

  friend bool operator==(const SpectralProblem&, const SpectralProblem&) = default;

 private:
  std::vector<double> eigenvalues_;
  bool has_duplicates_ = false;
};

/// g_k in spectral coordinates together with its iteration index.
struct GradientVector {
  std::vector<double> components;
  std::size_t k = 0;

  std::size_t dimension() const noexcept { return components.size(); }
  double norm() const;
  bool is_zero() const;

  friend bool operator==(const GradientVector&, const GradientVector&) = default;
};

/// The record of one run: gradients g_0..g_K, stepsizes alpha_0..alpha_{K-1}
/// and the objective gap at every recorded gradient.
struct GradientTrajectory {
  SpectralProblem problem;
  std::vector<GradientVector> gradients;
  std::vector<double> stepsizes;
  std::vector<double> fgaps;

  /// Number of steps taken (K).
  std::size_t steps() const noexcept { return stepsizes.size(); }
};

/// A dense SPD problem before conversion to spectral coordinates.
/// The matrix is stored row-major.
struct DenseProblem {
  std::size_t n = 0;
  std::vector<double> matrix;
  std::vector<double> rhs;

  double at(std::size_t row, std::size_t col) const { return matrix[row * n + col]; }
};

/// g' = (I - alpha*Lambda) g, with g'.k = g.k + 1.
GradientVector gradient_step(const GradientVector& g, double alpha, const SpectralProblem& problem);

/// f(x) - f(x*) = 1/2 sum_i g_i^2 / lambda_i.
double fgap(const GradientVector& g, const SpectralProblem& problem);

/// e = x - x* = A^{-1} g.
std::vector<double> error_vector(const GradientVector& g, const SpectralProblem& problem);

/// Throws StructuralError unless g has the problem's dimension.
void require_dimension(const GradientVector& g, const SpectralProblem& problem);

/// Trajectory invariants: recurrence exactness and the recorded fgaps.
/// Returns the largest recurrence residual measured in ulps of the larger
/// magnitude involved.
double recurrence_residual_ulps(const GradientTrajectory& traj);

}  // namespace gradlab
