#pragma once

#include <stdexcept>
#include <string>

namespace ims {

/// Argument outside the domain of an operation (bad particle type, bad
/// lattice side, non-bijective permutation, malformed model file, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input is valid but too large for an exhaustive routine.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace ims
