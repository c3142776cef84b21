#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gradlab/spectral.hpp"

namespace gradlab {

struct JacobiOptions {
  // Stop once the off-diagonal Frobenius norm drops below
  // relative_threshold * ||A||_F.
  double relative_threshold = 1e-14;
  int max_sweeps = 100;
};

/// Eigenpairs of a symmetric matrix, eigenvalues ascending. `vectors` is
/// row-major n x n; column j holds the eigenvector of values[j].
struct SymmetricEigen {
  std::vector<double> values;
  std::vector<double> vectors;
  int sweeps = 0;
};

/// Cyclic Jacobi rotations. Throws DomainError on non-symmetric input and
/// Error when the sweep cap is reached before the threshold.
SymmetricEigen jacobi_eigen(std::size_t n, std::span<const double> matrix, JacobiOptions options = {});

/// A dense problem carried into its eigenbasis.
class SpectralDecomposition {
 public:
  SpectralDecomposition(SpectralProblem problem, std::vector<double> basis, std::vector<double> rhs);

  const SpectralProblem& problem() const noexcept { return problem_; }
  std::size_t dimension() const noexcept { return problem_.dimension(); }
  /// Row-major orthogonal Q with A = Q Lambda Q'.
  std::span<const double> basis() const noexcept { return basis_; }

  /// Q' v.
  std::vector<double> to_spectral(std::span<const double> v) const;
  /// Q v.
  std::vector<double> from_spectral(std::span<const double> v) const;
  /// Spectral gradient at a dense point: Q'(A x - b) = Lambda Q'x - Q'b.
  GradientVector gradient_at(std::span<const double> x) const;
  /// Q Lambda Q', row-major.
  std::vector<double> reconstruct() const;

 private:
  SpectralProblem problem_;
  std::vector<double> basis_;
  std::vector<double> rhs_spectral_;
};

/// Validates symmetry (relative 1e-12) and positive definiteness, then
/// diagonalizes. Errors name the offending entry or eigenvalue.
SpectralDecomposition spectralize(const DenseProblem& dense);

/// ||M||_F for a row-major square matrix.
double frobenius_norm(std::span<const double> matrix);

}  // namespace gradlab
