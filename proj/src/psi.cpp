#include "gradlab/psi.hpp"

#include <cmath>
#include <sstream>

#include "gradlab/errors.hpp"

namespace gradlab {

namespace {

constexpr int kGridPoints = 1000;

double polynomial(const std::vector<double>& coefficients, double z) {
  double value = 0.0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) value = value * z + *it;
  return value;
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string format_coefficients(const std::vector<double>& c) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < c.size(); ++i) out << (i ? "," : "") << c[i];
  out << "]";
  return out.str();
}

}  // namespace

PsiSpec PsiSpec::power(double rho) {
  if (!std::isfinite(rho) || rho < 0.0) throw DomainError("psi power exponent must be >= 0");
  return PsiSpec(Power{rho});
}

PsiSpec PsiSpec::rational(std::vector<double> numerator, std::vector<double> denominator, bool square) {
  if (numerator.empty() || denominator.empty()) {
    throw DomainError("rational psi needs non-empty numerator and denominator coefficients");
  }
  return PsiSpec(Rational{std::move(numerator), std::move(denominator), square});
}

PsiSpec PsiSpec::tabulated(std::vector<double> values) {
  if (values.empty()) throw DomainError("tabulated psi needs at least one value");
  return PsiSpec(Tabulated{std::move(values)});
}

double PsiSpec::operator()(double z) const {
  return std::visit(Overloaded{
                        [](const Identity&) { return 1.0; },
                        [z](const Power& p) { return p.rho == 0.0 ? 1.0 : std::pow(z, p.rho); },
                        [z](const Rational& r) {
                          const double ratio = polynomial(r.numerator, z) / polynomial(r.denominator, z);
                          return r.square ? ratio * ratio : ratio;
                        },
                        [](const Tabulated&) -> double {
                          throw DomainError("tabulated psi has no value off the spectrum");
                        },
                    },
                    form_);
}

std::vector<double> PsiSpec::evaluate(const SpectralProblem& problem) const {
  const auto lambda = problem.eigenvalues();
  std::vector<double> values(lambda.size());
  if (const auto* table = std::get_if<Tabulated>(&form_)) {
    if (table->values.size() != lambda.size()) {
      throw StructuralError("tabulated psi has " + std::to_string(table->values.size()) +
                            " values, problem has dimension " + std::to_string(lambda.size()));
    }
    values = table->values;
  } else {
    for (std::size_t i = 0; i < lambda.size(); ++i) values[i] = (*this)(lambda[i]);
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!positive_finite(values[i])) {
      std::ostringstream msg;
      msg << "psi(" << lambda[i] << ") = " << values[i] << " is not positive and finite";
      throw DomainError(msg.str());
    }
  }
  if (std::holds_alternative<Power>(form_) || std::holds_alternative<Rational>(form_)) {
    const double lo = problem.smallest();
    const double hi = problem.largest();
    for (int j = 0; j < kGridPoints; ++j) {
      const double z = lo + (hi - lo) * j / (kGridPoints - 1);
      const double v = (*this)(z);
      if (!positive_finite(v)) {
        std::ostringstream msg;
        msg << "psi(" << z << ") = " << v << " is not positive and finite on [lambda_1, lambda_n]";
        throw DomainError(msg.str());
      }
    }
  }
  return values;
}

std::string PsiSpec::describe() const {
  return std::visit(Overloaded{
                        [](const Identity&) { return std::string("identity"); },
                        [](const Power& p) {
                          std::ostringstream out;
                          out << "z^" << p.rho;
                          return out.str();
                        },
                        [](const Rational& r) {
                          return std::string("rational(num=") + format_coefficients(r.numerator) +
                                 ", den=" + format_coefficients(r.denominator) +
                                 (r.square ? ", squared)" : ")");
                        },
                        [](const Tabulated& t) {
                          return std::string("tabulated") + format_coefficients(t.values);
                        },
                    },
                    form_);
}

std::vector<double> envelope_weights(const std::vector<double>& psi_values) {
  std::vector<double> roots(psi_values.size());
  for (std::size_t i = 0; i < roots.size(); ++i) roots[i] = std::sqrt(psi_values[i]);
  return roots;
}

}  // namespace gradlab
