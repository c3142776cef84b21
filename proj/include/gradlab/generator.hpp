#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gradlab/spectral.hpp"

namespace gradlab {

enum class Spacing { Uniform, Log, Random };

Spacing parse_spacing(const std::string& name);
std::string to_string(Spacing s);

/// Seeded source of uniforms with a platform-independent mapping from the
/// mt19937_64 stream (standard distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

/// Eigenvalues in [1, kappa] with lambda_1 = 1 and lambda_n = kappa exactly.
/// Uniform and Log are fixed grids (linear and geometric); Random draws
/// uniforms, sorts them and maps the extremes onto the endpoints.
SpectralProblem generate_spectrum(std::size_t n, double kappa, Spacing spacing, std::uint64_t seed = 0);

/// Components uniform in [-1, 1].
GradientVector random_gradient(std::size_t n, std::uint64_t seed);

}  // namespace gradlab
