#pragma once

#include <stdexcept>
#include <string>

namespace hetnet {

// Raised when a caller breaks an operation's precondition (wrong dimensions,
// stepping a finished episode, mismatched caches).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace hetnet
