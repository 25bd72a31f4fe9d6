#pragma once

#include <string>
#include <vector>

namespace momentsieve {
namespace cli {

/// Runs one job given argv without the program name.
/// Returns 0 on success, 2 when the model family is rejected, 1 on I/O or validation errors.
int run(const std::vector<std::string>& args);

}  // namespace cli
}  // namespace momentsieve
