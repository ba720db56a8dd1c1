#pragma once

#include <stdexcept>
#include <string>

namespace bts {

// A caller-supplied value violates an operation's precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The request is well formed but exceeds a configured capacity
// (exact mode deck size, integer width).
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// An internal invariant was found broken. Always a bug.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace detail {
inline void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError(what);
}
inline void ensure(bool ok, const std::string& what) {
  if (!ok) throw InvariantViolation(what);
}
}  // namespace detail

}  // namespace bts
