#include "spotsim/error.hpp"

namespace spotsim {

namespace {

std::string summarize(const std::vector<Diagnostic>& diags) {
  if (diags.empty()) return "validation failed";
  std::string msg = diags.front().location + ": " + diags.front().message;
  if (diags.size() > 1) msg += " (and " + std::to_string(diags.size() - 1) + " more)";
  return msg;
}

}  // namespace

ValidationError::ValidationError(std::vector<Diagnostic> diagnostics)
    : Error(summarize(diagnostics)), diagnostics_(std::move(diagnostics)) {}

ValidationError::ValidationError(std::string location, std::string message)
    : ValidationError(std::vector<Diagnostic>{{std::move(location), std::move(message)}}) {}

}  // namespace spotsim
