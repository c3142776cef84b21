#pragma once

#include <stdexcept>
#include <string>

namespace gradlab {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape problems: dimension mismatches, empty trajectories, short prefixes.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Mathematical preconditions: non-positive stepsizes, non-SPD matrices,
// non-positive weight functions, out-of-range inverse stepsizes.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A stepsize rule was asked for a value it cannot produce yet.
class SequencingError : public Error {
 public:
  using Error::Error;
};

// A reference gradient is exactly zero; the iteration has converged.
class ConvergenceSignal : public Error {
 public:
  using Error::Error;
};

// Invalid experiment configuration; the message names the field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gradlab
