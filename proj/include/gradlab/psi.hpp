#pragma once

#include <string>
#include <variant>
#include <vector>

#include "gradlab/spectral.hpp"

namespace gradlab {

/// A weight function psi, positive on [lambda_1, lambda_n]. For a diagonal
/// Hessian only the values psi(lambda_i) ever enter a computation; the
/// symbolic forms exist so rules can be specified and validated.
///
/// The value psi(lambda_i) is the weight the stepsize inequality puts on
/// (g^(i))^2:  alpha_k <= sum psi_i g_i^2 / sum lambda_i psi_i g_i^2.
class PsiSpec {
 public:
  struct Identity {
    friend bool operator==(const Identity&, const Identity&) = default;
  };
  /// psi(z) = z^rho, rho >= 0.
  struct Power {
    double rho = 0.0;
    friend bool operator==(const Power&, const Power&) = default;
  };
  /// psi(z) = (p(z) / q(z))^(square ? 2 : 1); coefficients in ascending
  /// powers of z.
  struct Rational {
    std::vector<double> numerator;
    std::vector<double> denominator;
    bool square = false;
    friend bool operator==(const Rational&, const Rational&) = default;
  };
  /// Explicit psi(lambda_i), one per eigenvalue.
  struct Tabulated {
    std::vector<double> values;
    friend bool operator==(const Tabulated&, const Tabulated&) = default;
  };
  using Form = std::variant<Identity, Power, Rational, Tabulated>;

  PsiSpec() = default;

  static PsiSpec identity() { return PsiSpec(Identity{}); }
  static PsiSpec power(double rho);
  static PsiSpec rational(std::vector<double> numerator, std::vector<double> denominator, bool square);
  static PsiSpec tabulated(std::vector<double> values);

  const Form& form() const noexcept { return form_; }
  bool is_identity() const noexcept { return std::holds_alternative<Identity>(form_); }

  /// psi(z) for the analytic forms. Tabulated forms have no value off the
  /// spectrum and throw DomainError.
  double operator()(double z) const;

  /// psi(lambda_i) for every eigenvalue. Throws DomainError when a value is
  /// not positive and finite, or (analytic forms other than identity) when
  /// psi fails to stay positive on a 1000-point grid over [lambda_1, lambda_n].
  std::vector<double> evaluate(const SpectralProblem& problem) const;

  std::string describe() const;

  friend bool operator==(const PsiSpec&, const PsiSpec&) = default;

 private:
  explicit PsiSpec(Form form) : form_(std::move(form)) {}
  Form form_ = Identity{};
};

/// The weight used by the envelope recursion and the G(k,l) sums: the
/// square root of the stepsize weight, so that psi_i g_i^2 = (root_i g_i)^2.
std::vector<double> envelope_weights(const std::vector<double>& psi_values);

}  // namespace gradlab
