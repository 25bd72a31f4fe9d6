#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace momentsieve {

/// Thrown when an argument violates a documented precondition.
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when the moments are valid but do not belong to the requested model family.
/// `reason` is a stable short phrase; `diagnostics` carries free-form detail lines.
class Rejection : public std::runtime_error {
 public:
  Rejection(std::string reason, std::vector<std::string> diagnostics = {})
      : std::runtime_error(compose(reason, diagnostics)),
        reason_(std::move(reason)),
        diagnostics_(std::move(diagnostics)) {}

  const std::string& reason() const { return reason_; }
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  static std::string compose(const std::string& r, const std::vector<std::string>& d) {
    std::string out = r;
    for (const auto& line : d) out += "\n  " + line;
    return out;
  }
  std::string reason_;
  std::vector<std::string> diagnostics_;
};

}  // namespace momentsieve
