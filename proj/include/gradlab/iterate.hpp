#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gradlab/spectral.hpp"
#include "gradlab/stepsize.hpp"

namespace gradlab {

struct RunOptions {
  std::size_t max_iter = 1000;
  /// Stop once ||g_k|| <= tol * ||g_0||.
  double tol = 1e-12;
  StartupPolicy startup{};
};

enum class Termination { Tolerance, MaxIterations, ZeroReference };

std::string to_string(Termination t);

struct RunResult {
  GradientTrajectory trajectory;
  /// v(k) for every step: the gradient index that defined alpha_k.
  std::vector<std::size_t> references;
  Termination termination = Termination::MaxIterations;
};

/// Runs x_{k+1} = x_k - alpha_k g_k in spectral coordinates from g0.
RunResult iterate(const SpectralProblem& problem, GradientVector g0, const StepsizeRule& rule,
                  const RunOptions& options = {});

}  // namespace gradlab
