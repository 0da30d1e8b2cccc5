#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace specop::cli {

/// Exit codes: 0 success, 1 verification failure or non-convergence,
/// 2 usage, configuration, input or numerical errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace specop::cli
