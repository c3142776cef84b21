#include "gradlab/dense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "gradlab/errors.hpp"

namespace gradlab {

namespace {

constexpr double kSymmetryTolerance = 1e-12;

double off_diagonal_norm(std::size_t n, const std::vector<double>& a) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) sum += a[i * n + j] * a[i * n + j];
  return std::sqrt(sum);
}

void check_symmetric(std::size_t n, std::span<const double> matrix) {
  double scale = 0.0;
  for (double v : matrix) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double diff = std::abs(matrix[i * n + j] - matrix[j * n + i]);
      if (diff > kSymmetryTolerance * scale) {
        std::ostringstream msg;
        msg << "matrix is not symmetric at (" << i << ", " << j << "): difference " << diff;
        throw DomainError(msg.str());
      }
    }
  }
}

}  // namespace

double frobenius_norm(std::span<const double> matrix) {
  double sum = 0.0;
  for (double v : matrix) sum += v * v;
  return std::sqrt(sum);
}

SymmetricEigen jacobi_eigen(std::size_t n, std::span<const double> matrix, JacobiOptions options) {
  if (n == 0 || matrix.size() != n * n) {
    throw StructuralError("matrix must be n x n with n >= 1");
  }
  check_symmetric(n, matrix);

  std::vector<double> a(matrix.begin(), matrix.end());
  // Work on the exactly symmetric part.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      a[i * n + j] = a[j * n + i] = 0.5 * (a[i * n + j] + a[j * n + i]);

  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  const double threshold = options.relative_threshold * frobenius_norm(a);
  int sweep = 0;
  for (; sweep < options.max_sweeps; ++sweep) {
    if (off_diagonal_norm(n, a) <= threshold) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 1.0 / (2.0 * theta);
        } else {
          t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t r = 0; r < n; ++r) {
          const double arp = a[r * n + p];
          const double arq = a[r * n + q];
          a[r * n + p] = c * arp - s * arq;
          a[r * n + q] = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double apr = a[p * n + r];
          const double aqr = a[q * n + r];
          a[p * n + r] = c * apr - s * aqr;
          a[q * n + r] = s * apr + c * aqr;
        }
        a[p * n + q] = a[q * n + p] = 0.0;

        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = v[r * n + p];
          const double vrq = v[r * n + q];
          v[r * n + p] = c * vrp - s * vrq;
          v[r * n + q] = s * vrp + c * vrq;
        }
      }
    }
  }
  if (off_diagonal_norm(n, a) > threshold) {
    throw Error("Jacobi iteration did not converge within " + std::to_string(options.max_sweeps) +
                " sweeps");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a[x * n + x] < a[y * n + y]; });

  SymmetricEigen result;
  result.sweeps = sweep;
  result.values.resize(n);
  result.vectors.resize(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    result.values[j] = a[order[j] * n + order[j]];
    for (std::size_t r = 0; r < n; ++r) result.vectors[r * n + j] = v[r * n + order[j]];
  }
  return result;
}

SpectralDecomposition::SpectralDecomposition(SpectralProblem problem, std::vector<double> basis,
                                             std::vector<double> rhs)
    : problem_(std::move(problem)), basis_(std::move(basis)) {
  const std::size_t n = problem_.dimension();
  if (basis_.size() != n * n) throw StructuralError("basis must be n x n");
  if (rhs.empty()) rhs.assign(n, 0.0);
  if (rhs.size() != n) throw StructuralError("rhs must have length n");
  rhs_spectral_ = to_spectral(rhs);
}

std::vector<double> SpectralDecomposition::to_spectral(std::span<const double> v) const {
  const std::size_t n = dimension();
  if (v.size() != n) throw StructuralError("vector length does not match problem dimension");
  std::vector<double> out(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t r = 0; r < n; ++r) out[j] += basis_[r * n + j] * v[r];
  return out;
}

std::vector<double> SpectralDecomposition::from_spectral(std::span<const double> v) const {
  const std::size_t n = dimension();
  if (v.size() != n) throw StructuralError("vector length does not match problem dimension");
  std::vector<double> out(n, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < n; ++j) out[r] += basis_[r * n + j] * v[j];
  return out;
}

GradientVector SpectralDecomposition::gradient_at(std::span<const double> x) const {
  auto y = to_spectral(x);
  const auto lambda = problem_.eigenvalues();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = lambda[i] * y[i] - rhs_spectral_[i];
  return GradientVector{std::move(y), 0};
}

std::vector<double> SpectralDecomposition::reconstruct() const {
  const std::size_t n = dimension();
  const auto lambda = problem_.eigenvalues();
  std::vector<double> out(n * n, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) sum += basis_[r * n + j] * lambda[j] * basis_[c * n + j];
      out[r * n + c] = sum;
    }
  return out;
}

SpectralDecomposition spectralize(const DenseProblem& dense) {
  const std::size_t n = dense.n;
  if (n == 0 || dense.matrix.size() != n * n) {
    throw StructuralError("dense matrix must be n x n with n >= 1");
  }
  if (!dense.rhs.empty() && dense.rhs.size() != n) {
    throw StructuralError("rhs must have length " + std::to_string(n));
  }
  auto eig = jacobi_eigen(n, dense.matrix);
  for (double value : eig.values) {
    if (!(value > 0.0)) {
      std::ostringstream msg;
      msg << "matrix is not positive definite: eigenvalue " << value;
      throw DomainError(msg.str());
    }
  }
  return SpectralDecomposition(SpectralProblem(std::move(eig.values)), std::move(eig.vectors), dense.rhs);
}

}  // namespace gradlab
