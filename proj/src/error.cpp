#include "detour/error.hpp"

namespace detour {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::missing_input: return "missing_input";
    case ErrorKind::parse: return "parse";
    case ErrorKind::config: return "config";
    case ErrorKind::input: return "input";
    case ErrorKind::structural: return "structural";
    case ErrorKind::no_route: return "no_route";
    case ErrorKind::degenerate_plan: return "degenerate_plan";
    case ErrorKind::unmatched_point: return "unmatched_point";
    case ErrorKind::non_identifiable: return "non_identifiable";
    case ErrorKind::undefined_auc: return "undefined_auc";
    case ErrorKind::sequencing: return "sequencing";
    case ErrorKind::degenerate_fit: return "degenerate_fit";
    case ErrorKind::invariant: return "invariant";
  }
  return "unknown";
}

}  // namespace detour
