#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace detour {

// Every failure raised by the library carries one of these kinds so callers
// (the CLI in particular) can map it to a stable exit code.
enum class ErrorKind {
  missing_input,     // a referenced file does not exist or cannot be opened
  parse,             // malformed file content
  config,            // invalid configuration / parameters
  input,             // precondition violated by caller-supplied data
  structural,        // non-contiguous path, bad trajectory shape
  no_route,          // destination unreachable
  degenerate_plan,   // zero-length or zero-time initial plan
  unmatched_point,   // GPS point without a candidate segment
  non_identifiable,  // single-class training data
  undefined_auc,     // single-class evaluation data
  sequencing,        // operation called before a prerequisite
  degenerate_fit,    // OLS with constant regressor
  invariant,         // internal consistency breach
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace detour
