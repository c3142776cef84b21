#include "gradlab/iterate.hpp"

#include <cmath>

#include "gradlab/errors.hpp"

namespace gradlab {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Tolerance:
      return "tolerance";
    case Termination::MaxIterations:
      return "max_iter";
    case Termination::ZeroReference:
      return "zero_reference";
  }
  return "unknown";
}

RunResult iterate(const SpectralProblem& problem, GradientVector g0, const StepsizeRule& rule,
                  const RunOptions& options) {
  require_dimension(g0, problem);
  if (!(options.tol > 0.0)) throw ConfigError("tol must be positive");
  if (options.max_iter == 0) throw ConfigError("max_iter must be >= 1");
  g0.k = 0;

  StepsizeEngine engine(rule, problem, options.startup);
  RunResult result{GradientTrajectory{problem, {}, {}, {}}, {}, Termination::MaxIterations};
  auto& traj = result.trajectory;
  const double threshold = options.tol * g0.norm();
  traj.fgaps.push_back(fgap(g0, problem));
  traj.gradients.push_back(std::move(g0));

  for (std::size_t k = 0; k < options.max_iter; ++k) {
    const GradientVector& current = traj.gradients.back();
    if (current.norm() <= threshold) {
      result.termination = Termination::Tolerance;
      return result;
    }
    StepChoice choice;
    try {
      choice = engine.next(current);
    } catch (const ConvergenceSignal&) {
      result.termination = Termination::ZeroReference;
      return result;
    }
    GradientVector next = gradient_step(current, choice.alpha, problem);
    traj.stepsizes.push_back(choice.alpha);
    result.references.push_back(choice.reference);
    traj.fgaps.push_back(fgap(next, problem));
    traj.gradients.push_back(std::move(next));
  }
  if (traj.gradients.back().norm() <= threshold) result.termination = Termination::Tolerance;
  return result;
}

}  // namespace gradlab
