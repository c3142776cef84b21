#include "gradlab/generator.hpp"

#include <algorithm>
#include <cmath>

#include "gradlab/errors.hpp"

namespace gradlab {

Spacing parse_spacing(const std::string& name) {
  if (name == "uniform") return Spacing::Uniform;
  if (name == "log") return Spacing::Log;
  if (name == "random") return Spacing::Random;
  throw ConfigError("unknown spacing '" + name + "' (expected uniform, log or random)");
}

std::string to_string(Spacing s) {
  switch (s) {
    case Spacing::Uniform:
      return "uniform";
    case Spacing::Log:
      return "log";
    case Spacing::Random:
      return "random";
  }
  return "unknown";
}

SpectralProblem generate_spectrum(std::size_t n, double kappa, Spacing spacing, std::uint64_t seed) {
  if (n == 0) throw ConfigError("generator.n must be >= 1");
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw ConfigError("generator.kappa must be finite and >= 1");
  if (n == 1) {
    if (kappa != 1.0) throw ConfigError("generator: n = 1 forces kappa = 1");
    return SpectralProblem({1.0});
  }

  std::vector<double> lambda(n);
  switch (spacing) {
    case Spacing::Uniform:
      for (std::size_t i = 0; i < n; ++i) lambda[i] = 1.0 + (kappa - 1.0) * static_cast<double>(i) / (n - 1);
      break;
    case Spacing::Log:
      for (std::size_t i = 0; i < n; ++i) lambda[i] = std::pow(kappa, static_cast<double>(i) / (n - 1));
      break;
    case Spacing::Random: {
      Rng rng(seed);
      for (auto& v : lambda) v = rng.uniform();
      std::sort(lambda.begin(), lambda.end());
      const double lo = lambda.front();
      const double span = lambda.back() - lo;
      if (span == 0.0) throw ConfigError("generator: degenerate random draw");
      for (auto& v : lambda) v = 1.0 + (v - lo) * (kappa - 1.0) / span;
      break;
    }
  }
  lambda.front() = 1.0;
  lambda.back() = kappa;
  return SpectralProblem(std::move(lambda));
}

GradientVector random_gradient(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  GradientVector g{std::vector<double>(n), 0};
  for (auto& c : g.components) c = rng.uniform(-1.0, 1.0);
  return g;
}

}  // namespace gradlab
