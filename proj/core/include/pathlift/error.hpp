#pragma once

#include <stdexcept>
#include <string>

namespace pathlift {

/// Malformed input: bad shapes, out-of-range parameters, parse failures.
class InvalidInput : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A mathematical precondition failed on otherwise well-formed input
/// (e.g. parabolicity violated, empty exponent window).
class PreconditionFailure : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

}  // namespace pathlift
