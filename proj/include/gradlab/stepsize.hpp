#pragma once

#include <cstddef>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "gradlab/psi.hpp"
#include "gradlab/spectral.hpp"

namespace gradlab {

// ---------------------------------------------------------------------------
// Single-gradient stepsizes. All are inverse Rayleigh quotients of A under a
// positive weight, so 1/alpha lies in [lambda_1, lambda_n]. A zero gradient
// raises ConvergenceSignal.
// ---------------------------------------------------------------------------

/// sum w_i g_i^2 / sum lambda_i w_i g_i^2.
double weighted_stepsize(const GradientVector& g, const SpectralProblem& problem,
                         std::span<const double> weights);

/// Exact line search: g'g / g'Ag.
double sd_stepsize(const GradientVector& g, const SpectralProblem& problem);
/// Minimal gradient: g'Ag / g'A^2 g.
double mg_stepsize(const GradientVector& g, const SpectralProblem& problem);
/// ||g|| / ||Ag||.
double aopt_stepsize(const GradientVector& g, const SpectralProblem& problem);
/// g'A^rho g / g'A^(rho+1) g.
double moment_stepsize(const GradientVector& g, const SpectralProblem& problem, double rho);
/// 2 / (lambda_1 + lambda_n), the minimizer of ||I - alpha A||.
double const_opt_stepsize(const SpectralProblem& problem);

// ---------------------------------------------------------------------------
// Rules
// ---------------------------------------------------------------------------

class StepsizeRule;
using RulePtr = std::shared_ptr<const StepsizeRule>;

/// A named, parameterized map from gradient history to alpha_k. Composite
/// kinds hold their children through shared immutable pointers.
class StepsizeRule {
 public:
  struct Sd {};
  struct Mg {};
  struct Aopt {};
  struct Bb1 {};
  struct Bb2 {};
  /// alpha_k = g_v'A^rho g_v / g_v'A^(rho+1) g_v with v = k - retard.
  struct Gmr {
    double rho = 0.0;
    std::size_t retard = 0;
  };
  /// alpha_k = sum psi_i (g_v^(i))^2 / sum lambda_i psi_i (g_v^(i))^2, v = k - retard.
  struct PsiRetard {
    PsiSpec psi;
    std::size_t retard = 1;
  };
  struct Constant {
    double alpha = 0.0;
  };
  /// Inner rule evaluated at the start of every block of `cycle` steps and
  /// reused for the rest of the block.
  struct Cyclic {
    RulePtr inner;
    std::size_t cycle = 1;
  };
  /// `first` on even blocks of `period` steps, `second` on odd blocks.
  struct Alternate {
    RulePtr first;
    RulePtr second;
    std::size_t period = 1;
  };
  /// Switching rule: take `short_rule` when alpha_short / alpha_long < tau,
  /// otherwise `long_rule` (adaptive BB when the pair is BB1/BB2).
  struct Adaptive {
    RulePtr long_rule;
    RulePtr short_rule;
    double tau = 0.8;
  };
  /// Inner rule with 1/alpha clamped into [lambda_1, max_inverse].
  struct Clamped {
    RulePtr inner;
    double max_inverse = 0.0;
  };

  using Kind = std::variant<Sd, Mg, Aopt, Bb1, Bb2, Gmr, PsiRetard, Constant, Cyclic, Alternate,
                            Adaptive, Clamped>;

  static StepsizeRule sd() { return StepsizeRule(Sd{}); }
  static StepsizeRule mg() { return StepsizeRule(Mg{}); }
  static StepsizeRule aopt() { return StepsizeRule(Aopt{}); }
  static StepsizeRule bb1() { return StepsizeRule(Bb1{}); }
  static StepsizeRule bb2() { return StepsizeRule(Bb2{}); }
  static StepsizeRule gmr(double rho, std::size_t retard);
  static StepsizeRule psi_retard(PsiSpec psi, std::size_t retard);
  static StepsizeRule constant(double alpha);
  static StepsizeRule cyclic(StepsizeRule inner, std::size_t cycle);
  static StepsizeRule alternate(StepsizeRule first, StepsizeRule second, std::size_t period = 1);
  static StepsizeRule adaptive(StepsizeRule long_rule, StepsizeRule short_rule, double tau = 0.8);
  static StepsizeRule clamped(StepsizeRule inner, double max_inverse);

  const Kind& kind() const noexcept { return kind_; }

  /// Number of most recent gradients the rule may consult (the Property B
  /// window m it is designed for).
  std::size_t window() const;

  /// The weight psi for which the rule satisfies the weighted Rayleigh
  /// bound by construction, when one exists. Rules whose stepsize never
  /// exceeds the SD value of the referenced gradient report identity.
  std::optional<PsiSpec> natural_weight() const;
  /// alpha never exceeds the SD value of the gradient it references, so the
  /// identity-weighted bound holds at every step, startup steps included
  /// when the startup is SD or AOPT.
  bool sd_dominated() const;

  std::string name() const;

 private:
  explicit StepsizeRule(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

/// What the engine does at iterations where a rule lacks history. `None`
/// turns a missing history into a SequencingError.
struct StartupPolicy {
  enum class Kind { Sd, Aopt, Constant, None };
  Kind kind = Kind::Sd;
  double alpha = 0.0;
};

/// alpha_k and the index v(k) of the gradient that defined it.
struct StepChoice {
  double alpha = 0.0;
  std::size_t reference = 0;
};

/// Ring buffer of the most recent gradients of one run.
class RuleState {
 public:
  explicit RuleState(std::size_t window);

  /// Appends g; its index must follow the previous one.
  void push(GradientVector g);

  bool empty() const noexcept { return buffer_.empty(); }
  std::size_t size() const noexcept { return buffer_.size(); }
  std::size_t window() const noexcept { return window_; }
  /// Index of the newest gradient.
  std::size_t current() const;
  bool holds(std::size_t k) const noexcept;
  /// Throws SequencingError when g_k has left (or never entered) the buffer.
  const GradientVector& at(std::size_t k) const;

 private:
  std::deque<GradientVector> buffer_;
  std::size_t window_;
};

/// Owns a rule, its cached psi evaluations and the gradient history.
class StepsizeEngine {
 public:
  StepsizeEngine(const StepsizeRule& rule, SpectralProblem problem, StartupPolicy startup = {});

  /// Records g_k and returns alpha_k.
  StepChoice next(GradientVector g);

  /// alpha for the newest gradient in `state` without touching the engine's
  /// own history.
  StepChoice evaluate(const RuleState& state) const;

  const StepsizeRule& rule() const noexcept { return *root_; }
  const RuleState& state() const noexcept { return state_; }

 private:
  StepChoice evaluate_at(const StepsizeRule& rule, std::size_t k, const RuleState& state) const;
  StepChoice startup_at(std::size_t k, const RuleState& state) const;
  void cache_weights(const StepsizeRule& rule);

  RulePtr root_;
  SpectralProblem problem_;
  StartupPolicy startup_;
  RuleState state_;
  std::unordered_map<const StepsizeRule*, std::vector<double>> weights_;
};

/// One-shot evaluation of a rule on a prepared history.
StepChoice rule_stepsize(const RuleState& state, const StepsizeRule& rule, const SpectralProblem& problem,
                         StartupPolicy startup = {});

}  // namespace gradlab
