#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace covdist {

// All failures raised by this library carry a short machine-readable code
// (e.g. "NonPositiveEigenvalue", "BranchCutCrossed") plus a human-readable
// message with context.  Callers that only care about the class of failure
// can switch on code(); everything derives from std::runtime_error so that
// unaware callers still get a sensible what().
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace covdist
