#pragma once

#include <stdexcept>
#include <string>

namespace fedminimax {

// Bad argument to a pure function (non-positive sizes, out-of-range ratios, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A configuration that is internally inconsistent (e.g. gaussian noise with s < 2).
class InvalidConfiguration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Zero or sub-tolerance matrix passed to a polar routine.
class DegenerateInput : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Momentum with norm <= zero tolerance under ZeroMomentumPolicy::error.
class DegenerateMomentum : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConvergenceFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Server received the wrong number of client results.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A by-construction bound was breached; always an implementation bug.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace fedminimax
