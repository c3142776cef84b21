#include "gradlab/stepsize.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gradlab/errors.hpp"

namespace gradlab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// sum w_i g_i^2 / sum lambda_i w_i g_i^2 with w supplied per component.
template <class Weight>
double quotient(const GradientVector& g, const SpectralProblem& problem, Weight weight) {
  require_dimension(g, problem);
  const auto lambda = problem.eigenvalues();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double wg2 = weight(i) * g.components[i] * g.components[i];
    num += wg2;
    den += lambda[i] * wg2;
  }
  if (num == 0.0 || den == 0.0) {
    throw ConvergenceSignal("reference gradient g_" + std::to_string(g.k) + " is zero");
  }
  return num / den;
}

void require_rule(const RulePtr& rule, const char* what) {
  if (!rule) throw ConfigError(std::string("composite rule is missing its ") + what);
}

}  // namespace

double weighted_stepsize(const GradientVector& g, const SpectralProblem& problem,
                         std::span<const double> weights) {
  if (weights.size() != problem.dimension()) {
    throw StructuralError("weight vector length does not match problem dimension");
  }
  return quotient(g, problem, [&](std::size_t i) { return weights[i]; });
}

double sd_stepsize(const GradientVector& g, const SpectralProblem& problem) {
  return quotient(g, problem, [](std::size_t) { return 1.0; });
}

double mg_stepsize(const GradientVector& g, const SpectralProblem& problem) {
  const auto lambda = problem.eigenvalues();
  return quotient(g, problem, [&](std::size_t i) { return lambda[i]; });
}

double aopt_stepsize(const GradientVector& g, const SpectralProblem& problem) {
  require_dimension(g, problem);
  const auto lambda = problem.eigenvalues();
  double gg = 0.0;
  double agag = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double c = g.components[i];
    gg += c * c;
    agag += lambda[i] * lambda[i] * c * c;
  }
  if (gg == 0.0 || agag == 0.0) {
    throw ConvergenceSignal("reference gradient g_" + std::to_string(g.k) + " is zero");
  }
  // ||g|| / ||Ag|| taken as one square root of the squared-norm ratio.
  return std::sqrt(gg / agag);
}

double moment_stepsize(const GradientVector& g, const SpectralProblem& problem, double rho) {
  if (!(rho >= 0.0)) throw DomainError("moment exponent must be >= 0");
  const auto lambda = problem.eigenvalues();
  if (rho == 0.0) return sd_stepsize(g, problem);
  if (rho == 1.0) return mg_stepsize(g, problem);
  return quotient(g, problem, [&](std::size_t i) { return std::pow(lambda[i], rho); });
}

double const_opt_stepsize(const SpectralProblem& problem) {
  return 2.0 / (problem.smallest() + problem.largest());
}

// ---------------------------------------------------------------------------

StepsizeRule StepsizeRule::gmr(double rho, std::size_t retard) {
  if (!std::isfinite(rho) || rho < 0.0) throw ConfigError("gmr: rho must be >= 0");
  return StepsizeRule(Gmr{rho, retard});
}

StepsizeRule StepsizeRule::psi_retard(PsiSpec psi, std::size_t retard) {
  return StepsizeRule(PsiRetard{std::move(psi), retard});
}

StepsizeRule StepsizeRule::constant(double alpha) {
  if (!std::isfinite(alpha) || alpha <= 0.0) throw ConfigError("const: alpha must be positive");
  return StepsizeRule(Constant{alpha});
}

StepsizeRule StepsizeRule::cyclic(StepsizeRule inner, std::size_t cycle) {
  if (cycle == 0) throw ConfigError("cyclic: cycle length must be >= 1");
  return StepsizeRule(Cyclic{std::make_shared<const StepsizeRule>(std::move(inner)), cycle});
}

StepsizeRule StepsizeRule::alternate(StepsizeRule first, StepsizeRule second, std::size_t period) {
  if (period == 0) throw ConfigError("alternate: period must be >= 1");
  return StepsizeRule(Alternate{std::make_shared<const StepsizeRule>(std::move(first)),
                                std::make_shared<const StepsizeRule>(std::move(second)), period});
}

StepsizeRule StepsizeRule::adaptive(StepsizeRule long_rule, StepsizeRule short_rule, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("adaptive: tau must be positive");
  return StepsizeRule(Adaptive{std::make_shared<const StepsizeRule>(std::move(long_rule)),
                               std::make_shared<const StepsizeRule>(std::move(short_rule)), tau});
}

StepsizeRule StepsizeRule::clamped(StepsizeRule inner, double max_inverse) {
  if (!(max_inverse > 0.0) || !std::isfinite(max_inverse)) {
    throw ConfigError("clamp: M1 must be positive");
  }
  return StepsizeRule(Clamped{std::make_shared<const StepsizeRule>(std::move(inner)), max_inverse});
}

std::size_t StepsizeRule::window() const {
  return std::visit(Overloaded{
                        [](const Sd&) -> std::size_t { return 1; },
                        [](const Mg&) -> std::size_t { return 1; },
                        [](const Aopt&) -> std::size_t { return 1; },
                        [](const Bb1&) -> std::size_t { return 2; },
                        [](const Bb2&) -> std::size_t { return 2; },
                        [](const Gmr& r) { return r.retard + 1; },
                        [](const PsiRetard& r) { return r.retard + 1; },
                        [](const Constant&) -> std::size_t { return 1; },
                        [](const Cyclic& r) {
                          require_rule(r.inner, "inner rule");
                          return r.cycle - 1 + r.inner->window();
                        },
                        [](const Alternate& r) {
                          require_rule(r.first, "first rule");
                          require_rule(r.second, "second rule");
                          return std::max(r.first->window(), r.second->window());
                        },
                        [](const Adaptive& r) {
                          require_rule(r.long_rule, "long rule");
                          require_rule(r.short_rule, "short rule");
                          return std::max(r.long_rule->window(), r.short_rule->window());
                        },
                        [](const Clamped& r) {
                          require_rule(r.inner, "inner rule");
                          return r.inner->window();
                        },
                    },
                    kind_);
}

namespace {

// Moment quotients with rho >= 0 and their compositions.
bool sd_dominated(const StepsizeRule& rule) {
  return std::visit(Overloaded{
                        [](const StepsizeRule::Sd&) { return true; },
                        [](const StepsizeRule::Mg&) { return true; },
                        [](const StepsizeRule::Aopt&) { return true; },
                        [](const StepsizeRule::Bb1&) { return true; },
                        [](const StepsizeRule::Bb2&) { return true; },
                        [](const StepsizeRule::Gmr&) { return true; },
                        [](const StepsizeRule::PsiRetard& r) {
                          return r.psi.is_identity() ||
                                 std::holds_alternative<PsiSpec::Power>(r.psi.form());
                        },
                        [](const StepsizeRule::Constant&) { return false; },
                        [](const StepsizeRule::Cyclic& r) { return sd_dominated(*r.inner); },
                        [](const StepsizeRule::Alternate& r) {
                          return sd_dominated(*r.first) && sd_dominated(*r.second);
                        },
                        [](const StepsizeRule::Adaptive& r) {
                          return sd_dominated(*r.long_rule) && sd_dominated(*r.short_rule);
                        },
                        [](const StepsizeRule::Clamped&) { return false; },
                    },
                    rule.kind());
}

}  // namespace

bool StepsizeRule::sd_dominated() const { return gradlab::sd_dominated(*this); }

std::optional<PsiSpec> StepsizeRule::natural_weight() const {
  auto pair_weight = [](const StepsizeRule& a, const StepsizeRule& b) -> std::optional<PsiSpec> {
    auto wa = a.natural_weight();
    auto wb = b.natural_weight();
    if (wa && wb && *wa == *wb) return wa;
    if (a.sd_dominated() && b.sd_dominated()) return PsiSpec::identity();
    return std::nullopt;
  };
  return std::visit(Overloaded{
                        [](const Sd&) -> std::optional<PsiSpec> { return PsiSpec::identity(); },
                        [](const Mg&) -> std::optional<PsiSpec> { return PsiSpec::power(1.0); },
                        [](const Aopt&) -> std::optional<PsiSpec> { return PsiSpec::identity(); },
                        [](const Bb1&) -> std::optional<PsiSpec> { return PsiSpec::identity(); },
                        [](const Bb2&) -> std::optional<PsiSpec> { return PsiSpec::power(1.0); },
                        [](const Gmr& r) -> std::optional<PsiSpec> {
                          return r.rho == 0.0 ? PsiSpec::identity() : PsiSpec::power(r.rho);
                        },
                        [](const PsiRetard& r) -> std::optional<PsiSpec> { return r.psi; },
                        [](const Constant&) -> std::optional<PsiSpec> { return std::nullopt; },
                        [](const Cyclic& r) { return r.inner->natural_weight(); },
                        [&](const Alternate& r) { return pair_weight(*r.first, *r.second); },
                        [&](const Adaptive& r) { return pair_weight(*r.long_rule, *r.short_rule); },
                        [](const Clamped& r) { return r.inner->natural_weight(); },
                    },
                    kind_);
}

std::string StepsizeRule::name() const {
  std::ostringstream out;
  std::visit(Overloaded{
                 [&](const Sd&) { out << "SD"; },
                 [&](const Mg&) { out << "MG"; },
                 [&](const Aopt&) { out << "AOPT"; },
                 [&](const Bb1&) { out << "BB1"; },
                 [&](const Bb2&) { out << "BB2"; },
                 [&](const Gmr& r) { out << "GMR(rho=" << r.rho << ",r=" << r.retard << ")"; },
                 [&](const PsiRetard& r) { out << "PSI_RETARD(" << r.psi.describe() << ",r=" << r.retard << ")"; },
                 [&](const Constant& r) { out << "CONST(" << r.alpha << ")"; },
                 [&](const Cyclic& r) { out << "CYCLIC(" << r.inner->name() << ",c=" << r.cycle << ")"; },
                 [&](const Alternate& r) {
                   out << "ALTERNATE(" << r.first->name() << "," << r.second->name() << ",period=" << r.period
                       << ")";
                 },
                 [&](const Adaptive& r) {
                   out << "ADAPTIVE(" << r.long_rule->name() << "," << r.short_rule->name() << ",tau=" << r.tau
                       << ")";
                 },
                 [&](const Clamped& r) { out << "CLAMP(" << r.inner->name() << ",M1=" << r.max_inverse << ")"; },
             },
             kind_);
  return out.str();
}

// ---------------------------------------------------------------------------

RuleState::RuleState(std::size_t window) : window_(window) {
  if (window_ == 0) throw StructuralError("rule history window must be >= 1");
}

void RuleState::push(GradientVector g) {
  if (!buffer_.empty() && g.k != buffer_.back().k + 1) {
    throw SequencingError("gradient g_" + std::to_string(g.k) + " does not follow g_" +
                          std::to_string(buffer_.back().k));
  }
  buffer_.push_back(std::move(g));
  while (buffer_.size() > window_) buffer_.pop_front();
}

std::size_t RuleState::current() const {
  if (buffer_.empty()) throw SequencingError("no gradient recorded yet");
  return buffer_.back().k;
}

bool RuleState::holds(std::size_t k) const noexcept {
  return !buffer_.empty() && k >= buffer_.front().k && k <= buffer_.back().k;
}

const GradientVector& RuleState::at(std::size_t k) const {
  if (!holds(k)) {
    throw SequencingError("gradient g_" + std::to_string(k) + " is not in the rule history");
  }
  return buffer_[k - buffer_.front().k];
}

// ---------------------------------------------------------------------------

StepsizeEngine::StepsizeEngine(const StepsizeRule& rule, SpectralProblem problem, StartupPolicy startup)
    : root_(std::make_shared<const StepsizeRule>(rule)),
      problem_(std::move(problem)),
      startup_(startup),
      state_(root_->window()) {
  if (startup_.kind == StartupPolicy::Kind::Constant && !(startup_.alpha > 0.0)) {
    throw ConfigError("startup: constant alpha must be positive");
  }
  cache_weights(*root_);
}

void StepsizeEngine::cache_weights(const StepsizeRule& rule) {
  std::visit(Overloaded{
                 [&](const StepsizeRule::PsiRetard& r) { weights_[&rule] = r.psi.evaluate(problem_); },
                 [&](const StepsizeRule::Gmr& r) {
                   std::vector<double> w(problem_.dimension());
                   for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::pow(problem_.eigenvalue(i), r.rho);
                   weights_[&rule] = std::move(w);
                 },
                 [&](const StepsizeRule::Cyclic& r) { cache_weights(*r.inner); },
                 [&](const StepsizeRule::Alternate& r) {
                   cache_weights(*r.first);
                   cache_weights(*r.second);
                 },
                 [&](const StepsizeRule::Adaptive& r) {
                   cache_weights(*r.long_rule);
                   cache_weights(*r.short_rule);
                 },
                 [&](const StepsizeRule::Clamped& r) { cache_weights(*r.inner); },
                 [](const auto&) {},
             },
             rule.kind());
}

StepChoice StepsizeEngine::next(GradientVector g) {
  require_dimension(g, problem_);
  state_.push(std::move(g));
  return evaluate(state_);
}

StepChoice StepsizeEngine::evaluate(const RuleState& state) const {
  return evaluate_at(*root_, state.current(), state);
}

StepChoice StepsizeEngine::startup_at(std::size_t k, const RuleState& state) const {
  switch (startup_.kind) {
    case StartupPolicy::Kind::Aopt:
      return {aopt_stepsize(state.at(k), problem_), k};
    case StartupPolicy::Kind::Constant:
      return {startup_.alpha, k};
    case StartupPolicy::Kind::None:
      throw SequencingError("rule needs more history at k = " + std::to_string(k) +
                            " and no startup rule is configured");
    case StartupPolicy::Kind::Sd:
    default:
      return {sd_stepsize(state.at(k), problem_), k};
  }
}

StepChoice StepsizeEngine::evaluate_at(const StepsizeRule& rule, std::size_t k, const RuleState& state) const {
  auto retarded = [&](std::size_t retard, auto&& formula) -> StepChoice {
    if (k < retard) return startup_at(k, state);
    const std::size_t v = k - retard;
    return {formula(state.at(v)), v};
  };
  const auto weights_of = [&](const StepsizeRule& node) -> const std::vector<double>& {
    return weights_.at(&node);
  };

  return std::visit(
      Overloaded{
          [&](const StepsizeRule::Sd&) { return StepChoice{sd_stepsize(state.at(k), problem_), k}; },
          [&](const StepsizeRule::Mg&) { return StepChoice{mg_stepsize(state.at(k), problem_), k}; },
          [&](const StepsizeRule::Aopt&) { return StepChoice{aopt_stepsize(state.at(k), problem_), k}; },
          [&](const StepsizeRule::Bb1&) {
            return retarded(1, [&](const GradientVector& g) { return sd_stepsize(g, problem_); });
          },
          [&](const StepsizeRule::Bb2&) {
            return retarded(1, [&](const GradientVector& g) { return mg_stepsize(g, problem_); });
          },
          [&](const StepsizeRule::Gmr& r) {
            return retarded(r.retard, [&](const GradientVector& g) {
              if (r.rho == 0.0) return sd_stepsize(g, problem_);
              if (r.rho == 1.0) return mg_stepsize(g, problem_);
              return weighted_stepsize(g, problem_, weights_of(rule));
            });
          },
          [&](const StepsizeRule::PsiRetard& r) {
            return retarded(r.retard, [&](const GradientVector& g) {
              return weighted_stepsize(g, problem_, weights_of(rule));
            });
          },
          [&](const StepsizeRule::Constant& r) { return StepChoice{r.alpha, k}; },
          [&](const StepsizeRule::Cyclic& r) { return evaluate_at(*r.inner, k - k % r.cycle, state); },
          [&](const StepsizeRule::Alternate& r) {
            const bool first = (k / r.period) % 2 == 0;
            return evaluate_at(first ? *r.first : *r.second, k, state);
          },
          [&](const StepsizeRule::Adaptive& r) {
            const StepChoice long_step = evaluate_at(*r.long_rule, k, state);
            const StepChoice short_step = evaluate_at(*r.short_rule, k, state);
            return short_step.alpha / long_step.alpha < r.tau ? short_step : long_step;
          },
          [&](const StepsizeRule::Clamped& r) {
            StepChoice choice = evaluate_at(*r.inner, k, state);
            const double inverse = std::clamp(1.0 / choice.alpha, problem_.smallest(),
                                              std::max(r.max_inverse, problem_.smallest()));
            choice.alpha = 1.0 / inverse;
            return choice;
          },
      },
      rule.kind());
}

StepChoice rule_stepsize(const RuleState& state, const StepsizeRule& rule, const SpectralProblem& problem,
                         StartupPolicy startup) {
  const StepsizeEngine engine(rule, problem, startup);
  return engine.evaluate(state);
}

}  // namespace gradlab
